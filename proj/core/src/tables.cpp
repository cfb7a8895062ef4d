#include "mi/tables.hpp"

#include "mi/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mi {

namespace {

std::string column_suffix(const std::string& method) {
  std::string out = method;
  for (char& c : out) {
    if (c == ':') c = '_';
  }
  return out;
}

std::string parameter_label(Estimand e) { return e == Estimand::kMean ? "Mean" : "Slope"; }

bool has_pre(const SimulationConfig& config) {
  bool sw = false;
  bool nw = false;
  for (const auto& m : config.methods) {
    sw = sw || m == "sw";
    nw = nw || m == "new";
  }
  return sw && nw;
}

using Field = std::function<double(const EstimandSummary&)>;

struct Column {
  std::string prefix;
  Field field;
};

void write_csv(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config,
               const std::vector<Column>& primary, const std::vector<Column>& se, bool pre) {
  os << "parameter,n,r_over_n,r";
  for (const auto& col : primary) {
    for (const auto& m : config.methods) os << ',' << col.prefix << '_' << column_suffix(m);
  }
  if (pre) os << ",pre_percent";
  for (const auto& col : se) {
    for (const auto& m : config.methods) os << ',' << col.prefix << '_' << column_suffix(m);
  }
  os << '\n';

  for (Estimand e : config.estimands) {
    for (const auto& cell : cells) {
      os << parameter_label(e) << ',' << cell.cell.n << ',' << format_double(cell.cell.rate) << ','
         << cell.cell.r();
      for (const auto& col : primary) {
        for (const auto& m : config.methods) os << ',' << format_double(col.field(cell.at(m, e)));
      }
      if (pre) os << ',' << format_double(*cell.pre(e));
      for (const auto& col : se) {
        for (const auto& m : config.methods) os << ',' << format_double(col.field(cell.at(m, e)));
      }
      os << '\n';
    }
  }
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_table1(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config) {
  write_csv(os, cells, config,
            {{"mean", [](const EstimandSummary& s) { return s.mc_mean; }},
             {"variance", [](const EstimandSummary& s) { return s.mc_variance; }}},
            {{"mean_se", [](const EstimandSummary& s) { return s.mc_mean_se; }},
             {"variance_se", [](const EstimandSummary& s) { return s.mc_variance_se; }}},
            has_pre(config));
}

void write_table2(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config) {
  write_csv(os, cells, config,
            {{"rb", [](const EstimandSummary& s) { return s.relative_bias; }},
             {"z", [](const EstimandSummary& s) { return s.z_statistic; }}},
            {{"rb_se", [](const EstimandSummary& s) { return s.relative_bias_se; }}}, false);
}

void write_table3(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config) {
  write_csv(os, cells, config,
            {{"length", [](const EstimandSummary& s) { return s.mean_ci_length; }},
             {"coverage", [](const EstimandSummary& s) { return s.coverage_percent; }}},
            {{"length_se", [](const EstimandSummary& s) { return s.ci_length_se; }},
             {"coverage_se", [](const EstimandSummary& s) { return s.coverage_se; }}},
            false);
}

void write_diagnostics(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config) {
  os << "parameter,n,r_over_n,r,method,truth,mean_vhat,empirical_bias,empirical_bias_se,"
        "analytic_bias,analytic_variance,mean_df,median_length\n";
  for (Estimand e : config.estimands) {
    for (const auto& cell : cells) {
      for (const auto& m : config.methods) {
        const EstimandSummary& s = cell.at(m, e);
        os << parameter_label(e) << ',' << cell.cell.n << ',' << format_double(cell.cell.rate) << ','
           << cell.cell.r() << ',' << m << ',' << format_double(s.truth) << ','
           << format_double(s.mean_vhat) << ',' << format_double(s.empirical_bias) << ','
           << format_double(s.empirical_bias_se) << ',' << format_double(s.analytic_bias) << ','
           << format_double(s.analytic_variance) << ',' << format_double(s.mean_df) << ','
           << format_double(s.median_ci_length) << '\n';
      }
    }
  }
}

void write_markdown(std::ostream& os, std::span<const CellResult> cells, const SimulationConfig& config) {
  const bool pre = has_pre(config);
  auto header = [&](const std::string& title, const std::vector<std::string>& groups, bool with_pre) {
    os << "### " << title << "\n\n| Parameter | n | r/n |";
    for (const auto& g : groups) {
      for (const auto& m : config.methods) os << ' ' << g << " (" << m << ") |";
    }
    if (with_pre) os << " PRE (%) |";
    os << "\n|---|---|---|";
    for (std::size_t k = 0; k < groups.size() * config.methods.size(); ++k) os << "---|";
    if (with_pre) os << "---|";
    os << '\n';
  };
  auto rows = [&](const std::vector<std::pair<int, Field>>& fields, bool with_pre) {
    for (Estimand e : config.estimands) {
      for (const auto& cell : cells) {
        os << "| " << parameter_label(e) << " | " << cell.cell.n << " | " << cell.cell.rate << " |";
        for (const auto& [digits, field] : fields) {
          for (const auto& m : config.methods) {
            os << ' ' << std::fixed << std::setprecision(digits) << field(cell.at(m, e)) << " |";
          }
        }
        if (with_pre) os << ' ' << std::fixed << std::setprecision(1) << *cell.pre(e) << " |";
        os << '\n';
        os.unsetf(std::ios::floatfield);
        os << std::setprecision(6);
      }
    }
    os << '\n';
  };

  header("Mean, variance and PRE of the point estimators", {"Mean", "Variance"}, pre);
  rows({{1, [](const EstimandSummary& s) { return s.mc_mean; }},
        {6, [](const EstimandSummary& s) { return s.mc_variance; }}},
       pre);
  header("Relative bias and z-statistic of Rubin's variance estimator", {"RB", "z"}, false);
  rows({{4, [](const EstimandSummary& s) { return s.relative_bias; }},
        {2, [](const EstimandSummary& s) { return s.z_statistic; }}},
       false);
  header("Mean length and coverage of confidence intervals", {"Length", "Coverage (%)"}, false);
  rows({{4, [](const EstimandSummary& s) { return s.mean_ci_length; }},
        {1, [](const EstimandSummary& s) { return s.coverage_percent; }}},
       false);
}

void write_tables(const std::filesystem::path& dir, std::span<const CellResult> cells,
                  const SimulationConfig& config, bool markdown) {
  std::filesystem::create_directories(dir);
  auto emit = [&](const char* name, auto&& writer) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + (dir / name).string() + " for writing");
    writer(out, cells, config);
    if (!out) throw NumericalError("failed writing " + (dir / name).string());
  };
  emit("table1.csv", write_table1);
  emit("table2.csv", write_table2);
  emit("table3.csv", write_table3);
  emit("diagnostics.csv", write_diagnostics);
  if (markdown) emit("tables.md", write_markdown);
}

}  // namespace mi
