#pragma once

#include "hbfq/equilibrium.hpp"

#include <iosfwd>
#include <span>

namespace hbfq {

/// Full-precision cell: %.17g, empty for NaN.
std::string csv_number(double x);
/// Rounded display cell.
std::string csv_display(double x);

/// Long format: one row per (root, quantity), with the three equilibrium
/// condition values for two-threshold roots.
void write_solution_csv(std::ostream& os, std::span<const EquilibriumSolution> solutions,
                        int verify_grid = 1000);

void write_wardrop_csv(std::ostream& os, const WardropReport& report);

void write_sweep_csv(std::ostream& os, const SweepTable& table);

}  // namespace hbfq
