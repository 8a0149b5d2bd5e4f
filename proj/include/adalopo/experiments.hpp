#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adalopo/bandwidth.hpp"
#include "adalopo/testbed.hpp"

namespace adalopo::experiments {

enum class SelectorKind { Interval, Symmetric };
enum class SigmaMode { Known, Estimated };

struct EstimatorParams {
  int kappa = 2;
  double a = 1.05;
  std::size_t m = 25;
  double p = 2.0;
  bandwidth::GridKind grid = bandwidth::GridKind::Geom;
  SelectorKind selector = SelectorKind::Interval;
  SigmaMode sigma_mode = SigmaMode::Estimated;
  bool paper_literal_threshold = false;
};

struct RunConfig {
  testbed::DatasetSpec dataset;
  EstimatorParams est;
  std::vector<double> eval_points;
  std::size_t replications = 1;
  std::uint64_t seed_base = 0; // replication i uses dataset seed seed_base + i
  int jobs = 1;
};

//! x = j/k for j = 0..k.
std::vector<double> uniform_eval_grid(int k);

struct CurveRow {
  std::size_t replication = 0;
  double x = 0.0;
  double estimate = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t count = 0;
  std::size_t tested = 0;
  bool no_admissible = false;
  bool ok = true;
  std::string error;
};

struct CurveResult {
  std::vector<CurveRow> rows; // replication-major, eval-point order inside
  double sigma_true = 0.0;    // noise level of the first replication
  double sigma_used = 0.0;    // value handed to the selector (first replication)
};

//! Estimates at every eval point, one synthesized dataset per replication
//! (seed_base + i). Per-point failures are recorded in the row, not thrown.
CurveResult run_curve(const RunConfig& config);

//! Runs the estimator on an existing dataset (CSV import path).
std::vector<CurveRow> estimate_dataset(const testbed::Dataset& data, const EstimatorParams& est,
                                       const std::vector<double>& eval_points, double sigma_known);

struct RiskReport {
  std::vector<double> eval_points;
  std::vector<double> risks; // empirical p-risk per eval point
  std::vector<std::vector<double>> abs_errors; // [replication][point]
  double p = 2.0;
  std::size_t replications = 0;
};

//! Empirical p-risk ((1/R) sum |f_hat - f|^p)^{1/p} across replications with
//! seeds seed_base + i; deterministic for fixed seed_base and independent of
//! the number of worker threads.
RiskReport monte_carlo_risk(const RunConfig& config, const std::vector<double>& true_values);

struct SlopeFit {
  double slope = 0.0;
  double stderr_value = 0.0;
  std::size_t points_used = 0;
  std::size_t excluded_zero = 0;
};

//! OLS of log(risk) on log(log(n)/n) (use_log_n) or log(1/n). Requires at
//! least 4 distinct n spanning a decade; zero risks are excluded.
SlopeFit rate_exponent_fit(const std::vector<std::pair<double, double>>& n_risk, bool use_log_n);

struct RateStudyRow {
  double n = 0;
  double risk = 0;
  double theoretical_adaptive = 0; // exact balance-root rate when available
};

struct RateStudy {
  std::vector<RateStudyRow> rows;
  SlopeFit fit;
  double theoretical_exponent = 0.0; // s / (1 + 2s + beta)
};

//! Risk at a single point across a list of sample sizes plus the fitted
//! rate exponent. `modulus` feeds the theoretical column (ignored when the
//! balance equation has no root at some n).
RateStudy rate_study(const RunConfig& base, const std::vector<std::size_t>& n_values,
                     double eval_point, double true_value,
                     const rvdesign::ModulusSpec& modulus);

struct ConcentrationRow {
  double eps = 0.0;
  double empirical = 0.0;  // frequency of |N/(2 n F_nu(h)) - 1| > eps
  double bound = 0.0;      // 2 exp(-eps^2/(1+eps/3) n F_nu(h))
  double binom_se = 0.0;   // sqrt(p_hat (1-p_hat) / R)
  bool within_bound = false;
};

//! Window-count concentration against the Bernstein bound, for
//! eps in {0.1, 0.2, 0.5}. within_bound is empirical <= bound + 3 se.
std::vector<ConcentrationRow> concentration_check(const rvdesign::DesignSpec& design, double h,
                                                  std::size_t n, std::size_t replications,
                                                  std::uint64_t seed);

struct GapRow {
  double n = 0;
  int cls = 1; // 1 or 2
  double risk = 0.0;
  double risk_over_minimax = 0.0;  // risk / psi_n
  double risk_over_adaptive = 0.0; // risk / r_n
};

struct GapConfig {
  double s1 = 1.0, r1 = 1.0;
  double s2 = 2.0, r2 = 0.5;
  rvdesign::DesignSpec design = rvdesign::DesignSpec::uniform(0.5);
  double sigma = 0.15;
  std::vector<std::size_t> n_values;
  std::size_t replications = 200;
  std::uint64_t seed_base = 0;
  EstimatorParams est;
  double p = 2.0;
  int jobs = 1;
};

//! Empirical risk of the adaptive estimator at cusp representatives of two
//! smoothness classes, normalized by the minimax and by the adaptive
//! theoretical rates. Requires s1 < s2 and r2 < r1 (equality allowed for the
//! degenerate identical-class case).
std::vector<GapRow> adaptation_gap_report(const GapConfig& config);

// CSV writers; column orders are part of the tool's interface (see README).
void write_curve_csv(const std::string& path, const CurveResult& curve);
void write_risk_csv(const std::string& path, const RiskReport& report);
void write_rate_csv(const std::string& path, const RateStudy& study);
void write_concentration_csv(const std::string& path, const std::vector<ConcentrationRow>& rows);
void write_gap_csv(const std::string& path, const std::vector<GapRow>& rows);

} // namespace adalopo::experiments
