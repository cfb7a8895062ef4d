// mi_sim: Monte Carlo driver, exact-moments report and one-shot imputation.

#include "mi/combiner.hpp"
#include "mi/config.hpp"
#include "mi/dataset.hpp"
#include "mi/errors.hpp"
#include "mi/moments.hpp"
#include "mi/simulation.hpp"
#include "mi/tables.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

unsigned worker_count() {
  if (const char* env = std::getenv("MI_WORKERS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const long v = std::stol(env, &used);
      if (used == std::string(env).size() && v >= 1 && v <= 4096) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw mi::ValidationError(std::string("MI_WORKERS must be a positive integer (got '") + env + "')");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

struct SimulateOptions {
  std::string config_path;
  std::vector<std::string> n;
  std::vector<std::string> rate;
  std::vector<std::string> method;
  std::vector<std::string> estimand;
  std::string m;
  std::string replicates;
  std::string seed;
  std::string level;
  std::string out_dir = "results";
  bool markdown = false;
};

void print_matrix(std::ostream& os, const std::string& label, const mi::Matrix& a) {
  os << label << '\n';
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    os << "  ";
    for (Eigen::Index j = 0; j < a.cols(); ++j) os << ' ' << std::setw(24) << mi::format_double(a(i, j) + 0.0);
    os << '\n';
  }
}

int run_simulate(const SimulateOptions& opt, CLI::App& cmd) {
  mi::SimulationConfig config;
  if (!opt.config_path.empty()) config = mi::load_config(opt.config_path);
  const auto override = [&](const char* flag, const char* key, const std::string& value) {
    if (cmd.count(flag) > 0) mi::apply_setting(config, key, value);
  };
  override("--n", "n", join(opt.n));
  override("--rate", "rate", join(opt.rate));
  override("--method", "method", join(opt.method));
  override("--estimand", "estimand", join(opt.estimand));
  override("--m", "m", opt.m);
  override("--replicates", "replicates", opt.replicates);
  override("--seed", "seed", opt.seed);
  override("--level", "level", opt.level);
  config.validate();

  const unsigned workers = worker_count();
  std::vector<mi::CellResult> cells;
  for (std::size_t n : config.n_values) {
    for (double rate : config.rates) {
      const mi::CellSpec cell{n, rate};
      const auto start = std::chrono::steady_clock::now();
      cells.push_back(mi::run_cell(cell, config, workers));
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      std::cerr << "cell n=" << n << " r=" << cell.r() << " done in " << std::fixed << std::setprecision(1)
                << took.count() << " s (" << workers << " workers)\n";
    }
  }
  mi::write_tables(opt.out_dir, cells, config, opt.markdown);
  std::cout << "wrote tables for " << cells.size() << " cells to " << opt.out_dir << '\n';
  return 0;
}

struct MomentsOptions {
  std::size_t n = 20;
  std::size_t r = 12;
  std::vector<std::size_t> respondents;
  std::string data_path;
  bool intercept = true;
  std::string method = "sw";
  int m = 5;
  double sigma2 = 1.0;
};

int run_moments(const MomentsOptions& opt) {
  const mi::Prior prior = mi::Prior::from_tag(opt.method);
  std::optional<mi::DesignPartition> design;
  bool harness = false;
  if (!opt.data_path.empty()) {
    std::ifstream in(opt.data_path);
    if (!in) throw mi::ValidationError("cannot open " + opt.data_path);
    const mi::ImputeDataset data = mi::read_impute_csv(in, opt.intercept);
    design.emplace(data.x, data.respondents);
  } else if (!opt.respondents.empty()) {
    design.emplace(mi::harness_design(opt.n), opt.respondents);
    harness = true;
  } else {
    if (opt.r > opt.n) throw mi::ValidationError("--r exceeds --n");
    design.emplace(mi::DesignPartition::leading(mi::harness_design(opt.n), opt.r));
    harness = true;
  }

  const mi::LambdaParams lp = mi::lambda_params(design->r(), design->p(), prior);
  const mi::MomentReport rep = mi::regression_coefficient_moments(*design, opt.sigma2, opt.m, prior);
  const mi::VarianceComponents vc = mi::variance_components(*design, opt.sigma2, opt.m, prior);
  std::cout << "n = " << design->n() << ", r = " << design->r() << ", p = " << design->p() << ", M = " << opt.m
            << ", prior = " << prior.tag() << ", sigma2 = " << mi::format_double(opt.sigma2) << '\n';
  std::cout << "lambda = " << mi::format_double(lp.lam) << ", lambda0 = " << mi::format_double(lp.lam0)
            << ", lambda1 = " << mi::format_double(lp.lam1)
            << ", effective = " << mi::format_double(lp.effective(prior, opt.sigma2)) << "\n\n";
  print_matrix(std::cout, "Var(beta_hat_M)", rep.var_point);
  print_matrix(std::cout, "E(W)", rep.expected_within);
  print_matrix(std::cout, "E(B)", rep.expected_between);
  print_matrix(std::cout, "E(T) - Var(beta_hat_M)", rep.bias_rubin);
  print_matrix(std::cout, "sampling component", vc.sampling);
  print_matrix(std::cout, "missingness component", vc.missingness);
  print_matrix(std::cout, "imputation component", vc.imputation);

  if (harness) {
    const mi::Vector x0 = Eigen::Vector2d(1.0, mi::harness::kXBar);
    const auto lm = mi::linear_estimator_moments(mi::LinearEstimatorSpec::fitted_value(design->x_all(), x0),
                                                 *design, opt.sigma2, opt.m, prior);
    std::cout << "\nfitted value at x = " << mi::format_double(mi::harness::kXBar)
              << ": variance = " << mi::format_double(lm.var_point)
              << ", bias = " << mi::format_double(lm.bias_rubin)
              << ", relative bias = " << mi::format_double(lm.bias_rubin / lm.var_point) << '\n';
  }
  return 0;
}

struct ImputeOptions {
  std::string input;
  std::string method = "new";
  int m = 5;
  std::uint64_t seed = 1;
  double level = 0.95;
  bool intercept = true;
  std::string completed_out;
};

int run_impute(const ImputeOptions& opt) {
  std::ifstream in(opt.input);
  if (!in) throw mi::ValidationError("cannot open " + opt.input);
  const mi::ImputeDataset data = mi::read_impute_csv(in, opt.intercept);
  const mi::ImputeReport rep = mi::impute_dataset(data, mi::Prior::from_tag(opt.method), opt.m, opt.seed, opt.level);

  std::cout << "n = " << data.x.rows() << ", respondents = " << data.respondents.size() << ", M = " << opt.m
            << ", prior = " << mi::Prior::from_tag(opt.method).tag() << '\n';
  std::cout << "coefficient,estimate,within,between,total,alternative,df,lower,upper\n";
  for (std::size_t c = 0; c < data.covariate_names.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    const mi::IntervalEstimate& ci = rep.intervals[c];
    std::cout << data.covariate_names[c] << ',' << mi::format_double(rep.estimate.point(i)) << ','
              << mi::format_double(rep.estimate.within(i, i)) << ',' << mi::format_double(rep.estimate.between(i, i))
              << ',' << mi::format_double(rep.estimate.rubin_total(i, i)) << ','
              << mi::format_double(rep.alternative(i, i)) << ',' << mi::format_double(ci.df) << ','
              << mi::format_double(ci.lower()) << ',' << mi::format_double(ci.upper()) << '\n';
  }
  if (!opt.completed_out.empty()) {
    std::ofstream out(opt.completed_out);
    if (!out) throw mi::ValidationError("cannot write " + opt.completed_out);
    mi::write_completed_csv(out, data, rep.imputations);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple imputation under a normal linear model: simulation, exact moments, imputation"};
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte Carlo factorial (or a single cell) and write CSV tables");
  simulate->add_option("--config", sim.config_path, "key = value settings file; flags override it")->check(CLI::ExistingFile);
  simulate->add_option("--n", sim.n, "sample sizes");
  simulate->add_option("--rate", sim.rate, "response rates r/n");
  simulate->add_option("--method", sim.method, "imputation priors: sw, new, custom:<nu0>:<sigma0_sq>");
  simulate->add_option("--estimand", sim.estimand, "mean and/or slope");
  simulate->add_option("--m", sim.m, "imputations per replicate");
  simulate->add_option("--replicates", sim.replicates, "Monte Carlo replicates per cell");
  simulate->add_option("--seed", sim.seed, "root seed");
  simulate->add_option("--level", sim.level, "confidence level");
  simulate->add_option("--out-dir", sim.out_dir, "output directory")->capture_default_str();
  simulate->add_flag("--markdown", sim.markdown, "also write a rounded tables.md");

  MomentsOptions mom;
  CLI::App* moments = app.add_subcommand("moments", "Print closed-form moments for a design and prior");
  moments->add_option("--n", mom.n, "harness design size")->capture_default_str();
  moments->add_option("--r", mom.r, "respondents are the first r units")->capture_default_str();
  moments->add_option("--respondents", mom.respondents, "explicit 0-based respondent indices");
  moments->add_option("--data", mom.data_path, "CSV whose covariates define the design and empty y marks nonrespondents")
      ->check(CLI::ExistingFile);
  moments->add_flag("!--no-intercept", mom.intercept, "do not prepend an intercept column to --data");
  moments->add_option("--method", mom.method, "sw, new, or custom:<nu0>:<sigma0_sq>")->capture_default_str();
  moments->add_option("--m", mom.m, "imputations")->capture_default_str();
  moments->add_option("--sigma2", mom.sigma2, "model variance")->capture_default_str();

  ImputeOptions imp;
  CLI::App* impute = app.add_subcommand("impute", "Multiply impute a CSV dataset and report combined OLS estimates");
  impute->add_option("input", imp.input, "CSV with covariate columns and y (empty = missing)")
      ->required()
      ->check(CLI::ExistingFile);
  impute->add_option("--method", imp.method, "sw, new, or custom:<nu0>:<sigma0_sq>")->capture_default_str();
  impute->add_option("--m", imp.m, "imputations")->capture_default_str();
  impute->add_option("--seed", imp.seed, "root seed")->capture_default_str();
  impute->add_option("--level", imp.level, "confidence level")->capture_default_str();
  impute->add_flag("!--no-intercept", imp.intercept, "do not prepend an intercept column");
  impute->add_option("--completed-out", imp.completed_out, "write the completed datasets here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim, *simulate);
    if (*moments) return run_moments(mom);
    if (*impute) return run_impute(imp);
  } catch (const mi::ValidationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
