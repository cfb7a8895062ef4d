#include "mi/dataset.hpp"

#include "mi/errors.hpp"
#include "mi/rng.hpp"
#include "mi/tables.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace mi {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

double parse_field(const std::string& text, int lineno, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ValidationError("line " + std::to_string(lineno) + ": invalid value '" + text + "' in column '" +
                          column + "'");
  }
  return v;
}

}  // namespace

ImputeDataset read_impute_csv(std::istream& in, bool add_intercept) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("input CSV is empty (header row required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv(line);

  std::size_t y_col = header.size();
  ImputeDataset data;
  if (add_intercept) data.covariate_names.push_back("(intercept)");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      if (y_col != header.size()) throw ValidationError("header names column 'y' twice");
      y_col = c;
    } else {
      if (header[c].empty()) throw ValidationError("header has an empty column name");
      data.covariate_names.push_back(header[c]);
    }
  }
  if (y_col == header.size()) throw ValidationError("header must name an outcome column 'y'");
  if (data.covariate_names.empty()) throw ValidationError("at least one covariate column is required");

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    if (add_intercept) row.push_back(1.0);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == y_col) continue;
      row.push_back(parse_field(fields[c], lineno, header[c]));
    }
    if (fields[y_col].empty()) {
      ys.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      data.respondents.push_back(rows.size());
      ys.push_back(parse_field(fields[y_col], lineno, "y"));
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(data.covariate_names.size());
  data.x.resize(n, p);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < p; ++c) data.x(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    data.y(i) = ys[static_cast<std::size_t>(i)];
  }
  return data;
}

ImputeReport impute_dataset(const ImputeDataset& data, const Prior& prior, int m, std::uint64_t seed,
                            double level) {
  const DesignPartition design(data.x, data.respondents);
  if (design.n() <= design.p()) throw ValidationError("need more units than covariates");
  const Vector y_resp = design.gather_respondents(data.y);

  ImputeReport report;
  report.respondent_fit = ols_fit(design, y_resp);
  report.imputations = multiple_impute(design, y_resp, report.respondent_fit, prior, m,
                                       StreamKey(seed).child(Stage::kImputation));
  std::vector<PointVariance> fits;
  fits.reserve(report.imputations.completed.size());
  for (const Vector& completed : report.imputations.completed) {
    fits.push_back(imputed_regression_fit(design, completed));
  }
  report.estimate = combine(std::span<const PointVariance>(fits));
  report.alternative = alternative_variance(report.respondent_fit, report.estimate);

  const double complete_df = static_cast<double>(design.n() - design.p());
  for (Eigen::Index c = 0; c < report.estimate.point.size(); ++c) {
    const double within = report.estimate.within(c, c);
    const double between = report.estimate.between(c, c);
    const double df = within > 0.0 ? barnard_rubin_df(within, between, m, complete_df) : complete_df;
    report.intervals.push_back(
        confidence_interval(report.estimate.point(c), report.estimate.rubin_total(c, c), df, level));
  }
  return report;
}

void write_completed_csv(std::ostream& os, const ImputeDataset& data, const MultipleImputation& mi) {
  os << "imputation,unit";
  for (const auto& name : data.covariate_names) os << ',' << name;
  os << ",y\n";
  for (std::size_t k = 0; k < mi.completed.size(); ++k) {
    const Vector& y = mi.completed[k];
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      os << k + 1 << ',' << i + 1;
      for (Eigen::Index c = 0; c < data.x.cols(); ++c) os << ',' << format_double(data.x(i, c));
      os << ',' << format_double(y(i)) << '\n';
    }
  }
}

}  // namespace mi
