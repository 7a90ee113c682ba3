#include "ralb/ising.hpp"

#include <ostream>
#include <stdexcept>

namespace ralb {

IsingModel qubo_to_ising(const Qubo& q) {
  IsingModel model;
  model.h.assign(q.size(), 0.0);
  model.offset = q.offset();
  // Q_uu x_u       = Q_uu/2 - (Q_uu/2) s_u
  // Q_uv x_u x_v   = Q_uv/4 (1 - s_u - s_v + s_u s_v)
  for (const auto& [key, value] : q.terms()) {
    const auto [u, v] = key;
    if (u == v) {
      model.h[u] += value / 2.0;
      model.offset += value / 2.0;
    } else {
      model.h[u] += value / 4.0;
      model.h[v] += value / 4.0;
      model.J[key] -= value / 4.0;
      model.offset += value / 4.0;
    }
  }
  std::erase_if(model.J, [](const auto& kv) { return kv.second == 0.0; });
  return model;
}

Qubo ising_to_qubo(const IsingModel& model) {
  Qubo q(model.size());
  double offset = model.offset;
  // -J s_u s_v = -J + 2J x_u + 2J x_v - 4J x_u x_v ;  -h s_u = -h + 2h x_u
  for (const auto& [key, value] : model.J) {
    const auto [u, v] = key;
    q.add(u, v, -4.0 * value);
    q.add(u, u, 2.0 * value);
    q.add(v, v, 2.0 * value);
    offset -= value;
  }
  for (std::size_t u = 0; u < model.size(); ++u) {
    if (model.h[u] == 0.0) continue;
    q.add(u, u, 2.0 * model.h[u]);
    offset -= model.h[u];
  }
  q.add_offset(offset);
  q.drop_zeros();
  return q;
}

double ising_energy(const IsingModel& model, std::span<const std::int8_t> spins) {
  if (spins.size() != model.size()) throw std::invalid_argument("spin vector length mismatch");
  double e = model.offset;
  for (std::size_t u = 0; u < spins.size(); ++u) {
    if (spins[u] != 1 && spins[u] != -1) throw std::invalid_argument("spins must be +1 or -1");
    e -= model.h[u] * spins[u];
  }
  for (const auto& [key, value] : model.J) e -= value * spins[key.first] * spins[key.second];
  return e;
}

Spins to_spins(std::span<const std::uint8_t> bits) {
  Spins s(bits.size());
  for (std::size_t u = 0; u < bits.size(); ++u) s[u] = bits[u] ? -1 : 1;
  return s;
}

Bits to_bits(std::span<const std::int8_t> spins) {
  Bits b(spins.size());
  for (std::size_t u = 0; u < spins.size(); ++u) b[u] = spins[u] < 0 ? 1 : 0;
  return b;
}

void write_ising(std::ostream& os, const IsingModel& model) {
  std::size_t nh = 0;
  for (double v : model.h) nh += v != 0.0;
  os << "p ising 0 " << model.size() << ' ' << nh << ' ' << model.J.size() << '\n';
  os << "c convention minus\n";
  os << "c offset " << format_double(model.offset) << '\n';
  for (std::size_t u = 0; u < model.size(); ++u) {
    if (model.h[u] != 0.0) os << u << ' ' << u << ' ' << format_double(model.h[u]) << '\n';
  }
  for (const auto& [key, value] : model.J) {
    os << key.first << ' ' << key.second << ' ' << format_double(value) << '\n';
  }
}

}  // namespace ralb
