#pragma once

#include "mi/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

namespace mi {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Mean, variance and PRE of the point estimators (plus Monte Carlo SEs).
void write_table1(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config);
/// Relative bias and z-statistic of Rubin's variance estimator.
void write_table2(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config);
/// Mean length and coverage of the confidence intervals.
void write_table3(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config);
/// Per-method analytic-vs-empirical bias and mean degrees of freedom.
void write_diagnostics(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config);
/// Rounded human-readable rendering of all three tables.
void write_markdown(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config);

/// Writes table1.csv, table2.csv, table3.csv and diagnostics.csv (and
/// tables.md when `markdown` is set) into `dir`, creating it if needed.
void write_tables(const std::filesystem::path& dir, std::span<const CellResult> cells,
                  const SimulationConfig& config, bool markdown = false);

}  // namespace mi
