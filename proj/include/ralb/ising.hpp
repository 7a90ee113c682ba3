#pragma once

// Classical Ising form of a QUBO under sigma = 1 - 2x, so bit 0 is spin +1.
//
// Energy convention (minimisation, minus signs explicit):
//   E(sigma) = -sum_{u<v} J_uv sigma_u sigma_v - sum_u h_u sigma_u + offset

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ralb/qubo.hpp"

namespace ralb {

using Spins = std::vector<std::int8_t>;

struct IsingModel {
  std::vector<double> h;
  /// Strictly upper-triangular, no zero entries.
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> J;
  double offset = 0.0;

  std::size_t size() const { return h.size(); }
};

/// ising_energy(to_spins(b)) == q.energy_with_offset(b) for every b.
IsingModel qubo_to_ising(const Qubo& q);
Qubo ising_to_qubo(const IsingModel& model);

/// Throws std::invalid_argument on a length mismatch or a spin outside {+1,-1}.
double ising_energy(const IsingModel& model, std::span<const std::int8_t> spins);

Spins to_spins(std::span<const std::uint8_t> bits);
Bits to_bits(std::span<const std::int8_t> spins);

/// `p ising 0 N nh nJ`, `c convention minus`, `c offset <v>`, then `u u h_u`
/// for nonzero fields and `u v J_uv` for couplings.
void write_ising(std::ostream& os, const IsingModel& model);

}  // namespace ralb
