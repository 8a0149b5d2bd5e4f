#include "adalopo/experiments.hpp"

#include <atomic>
#include <mutex>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

#include "adalopo/rng.hpp"

namespace adalopo::experiments {

using locpoly::SampleSet;

namespace {

//! Runs job(i) for i in [0, total) on up to `jobs` threads. Work items write
//! to disjoint slots, so results do not depend on scheduling.
void parallel_for(std::size_t total, int jobs, const std::function<void(std::size_t)>& job) {
  if (jobs <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= total || failed.load()) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::size_t nthreads = std::min<std::size_t>(jobs, total);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

double sigma_for(const testbed::Dataset& data, SigmaMode mode) {
  if (mode == SigmaMode::Known) return data.sigma;
  return bandwidth::estimate_sigma(data.samples);
}

} // namespace

std::vector<double> uniform_eval_grid(int k) {
  if (k < 1) throw std::invalid_argument("uniform_eval_grid: need k >= 1");
  std::vector<double> xs(k + 1);
  for (int j = 0; j <= k; ++j) xs[j] = static_cast<double>(j) / k;
  return xs;
}

std::vector<CurveRow> estimate_dataset(const testbed::Dataset& data, const EstimatorParams& est,
                                       const std::vector<double>& eval_points,
                                       double sigma_known) {
  double sigma = est.sigma_mode == SigmaMode::Known ? sigma_known
                                                    : bandwidth::estimate_sigma(data.samples);
  if (!(sigma > 0.0)) {
    // noiseless data: a floor above roundoff keeps the thresholds defined
    // and dominates the O(1e-15) solver noise in the test statistics
    double scale = 0.0;
    for (double y : data.samples.ys) scale = std::max(scale, std::abs(y));
    sigma = 1e-9 * (1.0 + scale);
  }
  std::vector<CurveRow> rows(eval_points.size());
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    CurveRow& row = rows[k];
    row.x = eval_points[k];
    try {
      bandwidth::SelectionResult sel;
      if (est.selector == SelectorKind::Interval) {
        bandwidth::IntervalSelectorOptions opts;
        opts.paper_literal_threshold = est.paper_literal_threshold;
        sel = bandwidth::select_interval(data.samples, row.x, est.kappa, est.a, est.m, sigma, opts);
      } else {
        auto grid = bandwidth::build_grid(data.samples, row.x, est.grid, est.a);
        sel = bandwidth::select_bandwidth_symmetric(data.samples, row.x, est.kappa, est.p, grid,
                                                    sigma);
      }
      row.estimate = sel.fit.estimate;
      row.window_lo = sel.window.lo;
      row.window_hi = sel.window.hi;
      row.count = sel.fit.count;
      row.tested = sel.tested;
      row.no_admissible = sel.no_admissible;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.estimate = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rows;
}

CurveResult run_curve(const RunConfig& config) {
  CurveResult out;
  std::vector<std::vector<CurveRow>> per_rep(config.replications);
  std::vector<double> sigma_true(config.replications, 0.0);
  std::vector<double> sigma_used(config.replications, 0.0);
  parallel_for(config.replications, config.jobs, [&](std::size_t i) {
    testbed::DatasetSpec spec = config.dataset;
    spec.seed = config.seed_base + i;
    testbed::Dataset data = testbed::synthesize(spec);
    sigma_true[i] = data.sigma;
    sigma_used[i] = sigma_for(data, config.est.sigma_mode);
    per_rep[i] = estimate_dataset(data, config.est, config.eval_points, data.sigma);
    for (auto& row : per_rep[i]) row.replication = i;
  });
  if (!per_rep.empty()) {
    out.sigma_true = sigma_true.front();
    out.sigma_used = sigma_used.front();
  }
  for (auto& rows : per_rep)
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  return out;
}

RiskReport monte_carlo_risk(const RunConfig& config, const std::vector<double>& true_values) {
  if (config.replications < 2)
    throw std::invalid_argument("monte_carlo_risk: need at least 2 replications");
  if (true_values.size() != config.eval_points.size())
    throw std::invalid_argument("monte_carlo_risk: true values/eval points mismatch");
  RiskReport report;
  report.eval_points = config.eval_points;
  report.p = config.est.p;
  report.replications = config.replications;
  report.abs_errors.assign(config.replications,
                           std::vector<double>(config.eval_points.size(), 0.0));
  parallel_for(config.replications, config.jobs, [&](std::size_t i) {
    testbed::DatasetSpec spec = config.dataset;
    spec.seed = config.seed_base + i;
    testbed::Dataset data = testbed::synthesize(spec);
    auto rows = estimate_dataset(data, config.est, config.eval_points, data.sigma);
    for (std::size_t k = 0; k < rows.size(); ++k)
      report.abs_errors[i][k] = rows[k].ok ? std::abs(rows[k].estimate - true_values[k])
                                           : std::numeric_limits<double>::quiet_NaN();
  });
  report.risks.assign(config.eval_points.size(), 0.0);
  for (std::size_t k = 0; k < config.eval_points.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < config.replications; ++i)
      acc += std::pow(report.abs_errors[i][k], report.p);
    report.risks[k] = std::pow(acc / config.replications, 1.0 / report.p);
  }
  return report;
}

SlopeFit rate_exponent_fit(const std::vector<std::pair<double, double>>& n_risk, bool use_log_n) {
  std::vector<double> ns;
  for (const auto& [n, risk] : n_risk) ns.push_back(n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 4)
    throw std::invalid_argument("rate_exponent_fit: need at least 4 distinct n values");
  if (ns.back() < 10.0 * ns.front())
    throw std::invalid_argument("rate_exponent_fit: n values must span at least one decade");

  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const auto& [n, risk] : n_risk) {
    if (risk <= 0.0) {
      ++fit.excluded_zero;
      continue;
    }
    xs.push_back(use_log_n ? std::log(std::log(n) / n) : std::log(1.0 / n));
    ys.push_back(std::log(risk));
  }
  if (xs.size() < 3) throw std::invalid_argument("rate_exponent_fit: too few nonzero risks");
  const std::size_t mcount = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < mcount; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= mcount;
  my /= mcount;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < mcount; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  double intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < mcount; ++i) {
    double resid = ys[i] - (intercept + fit.slope * xs[i]);
    ssr += resid * resid;
  }
  fit.stderr_value = mcount > 2 ? std::sqrt(ssr / (mcount - 2) / sxx) : 0.0;
  fit.points_used = mcount;
  return fit;
}

RateStudy rate_study(const RunConfig& base, const std::vector<std::size_t>& n_values,
                     double eval_point, double true_value,
                     const rvdesign::ModulusSpec& modulus) {
  RateStudy study;
  study.theoretical_exponent =
      modulus.s / (1.0 + 2.0 * modulus.s + base.dataset.design.beta);
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t n : n_values) {
    RunConfig config = base;
    config.dataset.n = n;
    config.eval_points = {eval_point};
    RiskReport report = monte_carlo_risk(config, {true_value});
    RateStudyRow row;
    row.n = static_cast<double>(n);
    row.risk = report.risks.front();
    try {
      testbed::Dataset probe = testbed::synthesize(config.dataset);
      rvdesign::RateModel model{modulus, config.dataset.design, probe.sigma};
      row.theoretical_adaptive = rvdesign::theoretical_rate(model, static_cast<double>(n), true);
    } catch (const std::exception&) {
      row.theoretical_adaptive = std::numeric_limits<double>::quiet_NaN();
    }
    study.rows.push_back(row);
    pairs.emplace_back(row.n, row.risk);
  }
  study.fit = rate_exponent_fit(pairs, true);
  return study;
}

std::vector<ConcentrationRow> concentration_check(const rvdesign::DesignSpec& design, double h,
                                                  std::size_t n, std::size_t replications,
                                                  std::uint64_t seed) {
  double fnu = rvdesign::f_nu_integral(design, h);
  if (!(static_cast<double>(n) * fnu >= 1.0))
    throw std::invalid_argument("concentration_check: need n F_nu(h) >= 1");
  const std::vector<double> eps = {0.1, 0.2, 0.5};
  std::vector<std::size_t> exceed(eps.size(), 0);
  for (std::size_t rep = 0; rep < replications; ++rep) {
    std::vector<double> xs = rvdesign::sample_design(design, n, seed + rep);
    auto lo = std::lower_bound(xs.begin(), xs.end(), design.x0 - h);
    auto hi = std::upper_bound(xs.begin(), xs.end(), design.x0 + h);
    double ratio = static_cast<double>(hi - lo) / (2.0 * n * fnu);
    for (std::size_t k = 0; k < eps.size(); ++k)
      if (std::abs(ratio - 1.0) > eps[k]) ++exceed[k];
  }
  std::vector<ConcentrationRow> rows(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    ConcentrationRow& row = rows[k];
    row.eps = eps[k];
    row.empirical = static_cast<double>(exceed[k]) / replications;
    row.bound = 2.0 * std::exp(-eps[k] * eps[k] / (1.0 + eps[k] / 3.0) * n * fnu);
    row.binom_se = std::sqrt(row.empirical * (1.0 - row.empirical) / replications);
    row.within_bound = row.empirical <= row.bound + 3.0 * row.binom_se;
  }
  return rows;
}

std::vector<GapRow> adaptation_gap_report(const GapConfig& config) {
  if (!(config.s1 <= config.s2) || !(config.r2 <= config.r1))
    throw std::invalid_argument("adaptation_gap_report: need s1 <= s2 and r2 <= r1");
  if (!(config.sigma > 0.0))
    throw std::invalid_argument("adaptation_gap_report: sigma must be positive");
  std::vector<GapRow> rows;
  const double x0 = config.design.x0;
  for (int cls = 1; cls <= 2; ++cls) {
    double s = cls == 1 ? config.s1 : config.s2;
    double r = cls == 1 ? config.r1 : config.r2;
    rvdesign::ModulusSpec modulus(s, r);
    rvdesign::RateModel model{modulus, config.design, config.sigma};
    for (std::size_t n : config.n_values) {
      RunConfig run;
      run.dataset.target = testbed::TargetFunction::holder_cusp(s, x0, r);
      run.dataset.design = config.design;
      run.dataset.n = n;
      // fixed sigma across n: encode it through the rsnr of this target
      double sd = testbed::target_sd_grid(run.dataset.target);
      run.dataset.rsnr = sd / config.sigma;
      run.est = config.est;
      run.est.p = config.p;
      run.est.sigma_mode = SigmaMode::Known;
      run.eval_points = {x0};
      run.replications = config.replications;
      run.seed_base = config.seed_base;
      run.jobs = config.jobs;
      RiskReport report = monte_carlo_risk(run, {0.0}); // cusp value at x0 is 0
      GapRow row;
      row.n = static_cast<double>(n);
      row.cls = cls;
      row.risk = report.risks.front();
      row.risk_over_minimax = row.risk / rvdesign::theoretical_rate(model, row.n, false);
      row.risk_over_adaptive = row.risk / rvdesign::theoretical_rate(model, row.n, true);
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

} // namespace

void write_curve_csv(const std::string& path, const CurveResult& curve) {
  auto out = open_out(path);
  out << "replication,x,estimate,window_lo,window_hi,count,tested,no_admissible,status,error\n";
  for (const auto& r : curve.rows) {
    out << r.replication << "," << testbed::format_double(r.x) << ","
        << testbed::format_double(r.estimate) << "," << testbed::format_double(r.window_lo) << ","
        << testbed::format_double(r.window_hi) << "," << r.count << "," << r.tested << ","
        << (r.no_admissible ? 1 : 0) << "," << (r.ok ? "ok" : "error") << "," << r.error << "\n";
  }
}

void write_risk_csv(const std::string& path, const RiskReport& report) {
  auto out = open_out(path);
  out << "x,risk,p,replications\n";
  for (std::size_t k = 0; k < report.eval_points.size(); ++k)
    out << testbed::format_double(report.eval_points[k]) << ","
        << testbed::format_double(report.risks[k]) << "," << report.p << ","
        << report.replications << "\n";
}

void write_rate_csv(const std::string& path, const RateStudy& study) {
  auto out = open_out(path);
  out << "n,risk,theoretical_adaptive_rate\n";
  for (const auto& row : study.rows)
    out << row.n << "," << testbed::format_double(row.risk) << ","
        << testbed::format_double(row.theoretical_adaptive) << "\n";
  out << "# slope," << testbed::format_double(study.fit.slope) << ",stderr,"
      << testbed::format_double(study.fit.stderr_value) << ",theoretical_exponent,"
      << testbed::format_double(study.theoretical_exponent) << "\n";
}

void write_concentration_csv(const std::string& path, const std::vector<ConcentrationRow>& rows) {
  auto out = open_out(path);
  out << "eps,empirical,bernstein_bound,binomial_se,within_bound\n";
  for (const auto& row : rows)
    out << testbed::format_double(row.eps) << "," << testbed::format_double(row.empirical) << ","
        << testbed::format_double(row.bound) << "," << testbed::format_double(row.binom_se) << ","
        << (row.within_bound ? 1 : 0) << "\n";
}

void write_gap_csv(const std::string& path, const std::vector<GapRow>& rows) {
  auto out = open_out(path);
  out << "n,class,risk,risk_over_minimax_rate,risk_over_adaptive_rate\n";
  for (const auto& row : rows)
    out << row.n << "," << row.cls << "," << testbed::format_double(row.risk) << ","
        << testbed::format_double(row.risk_over_minimax) << ","
        << testbed::format_double(row.risk_over_adaptive) << "\n";
}

} // namespace adalopo::experiments
