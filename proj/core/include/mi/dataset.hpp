#pragma once

#include "mi/combiner.hpp"
#include "mi/imputation.hpp"
#include "mi/regression.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mi {

/// User data for one-shot imputation: covariates for every unit and an
/// outcome that may be missing.
struct ImputeDataset {
  std::vector<std::string> covariate_names;
  Matrix x;
  /// NaN where the outcome is missing.
  Vector y;
  std::vector<std::size_t> respondents;
};

/// Reads a CSV with a header naming the covariate columns and a `y` column.
/// An empty `y` field marks a nonrespondent; covariates must be present.
/// With `add_intercept` a leading column of ones named "(intercept)" is added.
ImputeDataset read_impute_csv(std::istream& in, bool add_intercept = false);

struct ImputeReport {
  RegressionFit respondent_fit;
  MultipleImputation imputations;
  MiEstimate estimate;
  Matrix alternative;
  /// Per-coefficient intervals from the diagonal of Rubin's total variance.
  std::vector<IntervalEstimate> intervals;
};

/// Imputes with `prior`, analyses each completed dataset by full-sample OLS,
/// and combines. Imputation k uses substream seed / kImputation / k.
ImputeReport impute_dataset(const ImputeDataset& data, const Prior& prior, int m, std::uint64_t seed,
                            double level = 0.95);

/// Long-format completed data: imputation,unit,<covariates>,y.
void write_completed_csv(std::ostream& os, const ImputeDataset& data, const MultipleImputation& mi);

}  // namespace mi
