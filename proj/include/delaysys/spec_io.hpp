#pragma once

#include <iosfwd>
#include <string>

#include "delaysys/delay_solver.hpp"

namespace delaysys {

/// Reads and validates a JSON system spec. Keys:
///   d, m, q, A, kernel, L, K, C, D, r, x0, phi, u, f, notes
/// Trajectories are {"start", "step", "samples"}; phi and u may instead be
/// {"constant": [...]} on [-r, 0]. Failures throw SpecError naming the field.
SystemSpec load_spec(const std::string& path);
SystemSpec parse_spec(const std::string& text);

/// Dimensions, delay structure, kernel poles and total variations.
void describe_spec(std::ostream& out, const SystemSpec& spec);

}  // namespace delaysys
