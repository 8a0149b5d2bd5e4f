#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace adalopo::cli {

namespace fs = std::filesystem;

experiments::EstimatorParams CliConfig::estimator() const {
  experiments::EstimatorParams est;
  est.kappa = kappa;
  est.a = a;
  est.m = m;
  est.p = p;
  est.grid = grid == "arith" ? bandwidth::GridKind::Arith : bandwidth::GridKind::Geom;
  est.selector = selector == "symmetric" ? experiments::SelectorKind::Symmetric
                                         : experiments::SelectorKind::Interval;
  est.sigma_mode = sigma_mode == "known" ? experiments::SigmaMode::Known
                                         : experiments::SigmaMode::Estimated;
  est.paper_literal_threshold = paper_literal_threshold;
  return est;
}

rvdesign::DesignSpec CliConfig::design() const {
  if (design_beta == 0.0) return rvdesign::DesignSpec::uniform(design_x0);
  return rvdesign::DesignSpec::power_law(design_x0, design_beta);
}

testbed::DatasetSpec CliConfig::dataset() const {
  testbed::DatasetSpec spec;
  spec.target = testbed::TargetFunction::by_name(target);
  spec.design = design();
  spec.n = n_values.front();
  spec.rsnr = rsnr;
  spec.seed = seed;
  return spec;
}

namespace {

//! Reads a flat "key = value" file into option tokens ("--key", "value").
std::vector<std::string> config_file_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("--config: malformed line '" + line + "' (expected key = value)");
    std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
    if (key.empty()) throw UsageError("--config: empty key in '" + line + "'");
    tokens.push_back("--" + key);
    if (!value.empty()) tokens.push_back(value);
  }
  return tokens;
}

//! Splits off "--config FILE" / "--config=FILE" and splices the file's
//! tokens in front of the remaining flags, so explicit flags win.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args,
                                           std::string& config_path) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config: missing file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  if (rest.empty()) throw UsageError("--config: a subcommand is required");
  std::vector<std::string> merged = {rest.front()}; // subcommand first
  auto injected = config_file_tokens(config_path);
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), rest.begin() + 1, rest.end());
  return merged;
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string tok = text.substr(pos, comma - pos);
    if (!tok.empty()) {
      long long v = 0;
      std::size_t used = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v < 1) throw UsageError("--n: bad sample size '" + tok + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
    pos = comma + 1;
  }
  if (out.empty()) throw UsageError("--n: empty list");
  return out;
}

} // namespace

bool parse_args(const std::vector<std::string>& args, CliConfig& config, std::string& help_text) {
  CLI::App app{"adaptive local polynomial estimation at a point under degenerate random design"};
  app.require_subcommand(1);

  std::string n_text = "2000";
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    // --config is spliced into the token stream before parsing; this entry
    // only documents it
    sub->add_option("--config", config.config_file, "flat key = value configuration file");
    sub->add_option("--target", config.target,
                    "target function: blocks|bumps|heavysine|doppler|cusp[:s[:x0[:r]]]")
        ->capture_default_str();
    sub->add_option("--design-x0", config.design_x0, "design degeneracy point in [0,1]")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    sub->add_option("--design-beta", config.design_beta,
                    "design regular-variation index (> -1; 0 = uniform design)")
        ->check(CLI::Range(-0.999999, 1e9))->capture_default_str();
    sub->add_option("--n", n_text, "sample size, or comma-separated list for rate/gap")
        ->capture_default_str();
    sub->add_option("--rsnr", config.rsnr, "root signal-to-noise ratio (inf = noiseless)")
        ->capture_default_str();
    sub->add_option("--seed", seed_text, "base seed (default: $ADALOPO_SEED, else 0)");
    sub->add_option("--kappa", config.kappa, "local polynomial degree")
        ->check(CLI::Range(0, 10))->capture_default_str();
    sub->add_option("--a", config.a, "grid growth parameter")->capture_default_str();
    sub->add_option("--m", config.m, "seed neighbourhood size (interval selector)")
        ->capture_default_str();
    sub->add_option("--p", config.p, "loss exponent")->check(CLI::Range(1.0, 64.0))
        ->capture_default_str();
    sub->add_option("--grid", config.grid, "symmetric-selector grid kind")
        ->check(CLI::IsMember({"arith", "geom"}))->capture_default_str();
    sub->add_option("--sigma", config.sigma_mode, "noise level source")
        ->check(CLI::IsMember({"known", "estimate"}))->capture_default_str();
    sub->add_option("--selector", config.selector, "bandwidth selector")
        ->check(CLI::IsMember({"interval", "symmetric"}))->capture_default_str();
    sub->add_flag("--paper-literal-threshold", config.paper_literal_threshold,
                  "scale only the first interval-threshold term by sigma");
    sub->add_option("--eval-grid", config.eval_grid, "evaluate at x = j/K for j = 0..K")
        ->check(CLI::Range(1, 1000000))->capture_default_str();
    sub->add_option("--replications", config.replications, "Monte Carlo replications")
        ->capture_default_str();
    sub->add_option("--jobs", config.jobs, "worker threads over replications")
        ->check(CLI::Range(1, 1024))->capture_default_str();
    sub->add_option("--out", config.out_dir, "output directory")->capture_default_str();
    sub->add_option("--input", config.input_path, "input dataset CSV (estimate)");
    sub->add_option("--window-h", config.window_h, "window radius (concentration)")
        ->capture_default_str();
    sub->add_option("--s1", config.s1, "smoothness of class 1 (gap)")->capture_default_str();
    sub->add_option("--s2", config.s2, "smoothness of class 2 (gap)")->capture_default_str();
    sub->add_option("--r1", config.r1, "radius of class 1 (gap)")->capture_default_str();
    sub->add_option("--r2", config.r2, "radius of class 2 (gap)")->capture_default_str();
    sub->add_option("--gap-sigma", config.gap_sigma, "noise level of the gap study")
        ->capture_default_str();
    // config-file tokens precede explicit flags; the last occurrence wins
    for (auto* opt : sub->get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };

  std::map<std::string, Subcommand> names = {
      {"synth", Subcommand::Synth},           {"estimate", Subcommand::Estimate},
      {"risk", Subcommand::Risk},             {"rate", Subcommand::Rate},
      {"concentration", Subcommand::Concentration}, {"gap", Subcommand::Gap}};
  std::map<std::string, CLI::App*> subs;
  subs["synth"] = app.add_subcommand("synth", "synthesize a dataset and write it as CSV");
  subs["estimate"] = app.add_subcommand("estimate", "estimate the curve on an evaluation grid");
  subs["risk"] = app.add_subcommand("risk", "Monte Carlo pointwise risk on the evaluation grid");
  subs["rate"] = app.add_subcommand("rate", "risk versus n and fitted rate exponent");
  subs["concentration"] = app.add_subcommand("concentration", "window-count concentration check");
  subs["gap"] = app.add_subcommand("gap", "adaptive-versus-minimax normalization study");
  for (auto& [name, sub] : subs) add_common(sub);

  std::vector<char*> argv;
  std::vector<std::string> storage = apply_config_file(args, config.config_file);
  storage.insert(storage.begin(), "adalopo");
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    help_text = app.help();
    for (auto& [name, sub] : subs)
      if (sub->parsed()) help_text = sub->help();
    return false;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (auto& [name, sub] : subs)
    if (sub->parsed()) config.subcommand = names[name];
  config.n_values = parse_n_list(n_text);

  if (seed_text.empty()) {
    const char* env = std::getenv("ADALOPO_SEED");
    seed_text = env != nullptr ? env : "0";
  }
  try {
    config.seed = std::stoull(seed_text);
  } catch (const std::exception&) {
    throw UsageError("--seed: bad value '" + seed_text + "'");
  }
  if (config.rsnr <= 0.0) throw UsageError("--rsnr must be positive");
  if (config.subcommand != Subcommand::Rate && config.subcommand != Subcommand::Gap &&
      config.n_values.size() != 1)
    throw UsageError("--n: a single value is required for this subcommand");
  return true;
}

namespace {

//! Tracks files written by one run; removes them unless released.
class OutputGuard {
public:
  ~OutputGuard() {
    if (released_) return;
    for (const auto& p : paths_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  std::string track(const std::string& p) {
    paths_.push_back(p);
    return p;
  }
  void release() { released_ = true; }

private:
  std::vector<std::string> paths_;
  bool released_ = false;
};

void write_run_meta(const std::string& path, const CliConfig& c, std::size_t n,
                    double sigma_used) {
  std::ofstream meta(path);
  meta << "target = " << c.target << "\n";
  meta << "design_x0 = " << testbed::format_double(c.design_x0) << "\n";
  meta << "design_beta = " << testbed::format_double(c.design_beta) << "\n";
  meta << "n = " << n << "\n";
  meta << "rsnr = " << testbed::format_double(c.rsnr) << "\n";
  meta << "seed = " << c.seed << "\n";
  meta << "kappa = " << c.kappa << "\n";
  meta << "a = " << testbed::format_double(c.a) << "\n";
  meta << "m = " << c.m << "\n";
  meta << "p = " << testbed::format_double(c.p) << "\n";
  meta << "grid = " << c.grid << "\n";
  meta << "selector = " << c.selector << "\n";
  meta << "sigma_mode = " << c.sigma_mode << "\n";
  meta << "sigma_used = " << testbed::format_double(sigma_used) << "\n";
  meta << "eval_grid = " << c.eval_grid << "\n";
}

int run_impl(const CliConfig& c, OutputGuard& guard) {
  fs::create_directories(c.out_dir);
  auto outpath = [&](const std::string& name) { return (fs::path(c.out_dir) / name).string(); };

  switch (c.subcommand) {
    case Subcommand::Synth: {
      testbed::Dataset data = testbed::synthesize(c.dataset());
      std::string path = guard.track(outpath("dataset.csv"));
      guard.track(path + ".meta");
      testbed::save_csv(data, path);
      std::cout << "synth: n=" << data.samples.size() << " target=" << c.target
                << " sigma=" << testbed::format_double(data.sigma) << " -> " << path << "\n";
      return 0;
    }
    case Subcommand::Estimate: {
      testbed::Dataset data;
      if (!c.input_path.empty()) {
        data = testbed::load_csv(c.input_path);
        if (c.sigma_mode == "known" && !(data.sigma > 0.0))
          throw UsageError("--sigma known requires a sidecar with a positive sigma");
      } else {
        data = testbed::synthesize(c.dataset());
      }
      auto eval = experiments::uniform_eval_grid(c.eval_grid);
      auto rows = experiments::estimate_dataset(data, c.estimator(), eval, data.sigma);
      experiments::CurveResult curve;
      curve.rows = std::move(rows);
      curve.sigma_true = data.sigma;
      curve.sigma_used = c.sigma_mode == "known" ? data.sigma
                                                 : bandwidth::estimate_sigma(data.samples);
      std::string path = guard.track(outpath("curve.csv"));
      experiments::write_curve_csv(path, curve);
      write_run_meta(guard.track(path + ".meta"), c, data.samples.size(), curve.sigma_used);
      std::size_t errors = 0, total_count = 0;
      double mean_width = 0.0;
      for (const auto& r : curve.rows) {
        if (!r.ok) ++errors;
        total_count += r.count;
        mean_width += r.window_hi - r.window_lo;
      }
      mean_width /= curve.rows.empty() ? 1 : curve.rows.size();
      std::cout << "estimate: " << curve.rows.size() << " points, mean window width "
                << mean_width << ", mean count "
                << (curve.rows.empty() ? 0 : total_count / curve.rows.size()) << ", errors "
                << errors << " -> " << path << "\n";
      return 0;
    }
    case Subcommand::Risk: {
      experiments::RunConfig run;
      run.dataset = c.dataset();
      run.est = c.estimator();
      run.eval_points = experiments::uniform_eval_grid(c.eval_grid);
      run.replications = c.replications;
      run.seed_base = c.seed;
      run.jobs = c.jobs;
      std::vector<double> truth(run.eval_points.size());
      for (std::size_t k = 0; k < truth.size(); ++k)
        truth[k] = testbed::eval_target(run.dataset.target, run.eval_points[k]);
      auto report = experiments::monte_carlo_risk(run, truth);
      std::string path = guard.track(outpath("risk.csv"));
      experiments::write_risk_csv(path, report);
      double worst = 0.0, mean = 0.0;
      for (double r : report.risks) {
        worst = std::max(worst, r);
        mean += r;
      }
      mean /= report.risks.empty() ? 1 : report.risks.size();
      std::cout << "risk: p=" << report.p << " R=" << report.replications << " mean="
                << mean << " max=" << worst << " -> " << path << "\n";
      return 0;
    }
    case Subcommand::Rate: {
      if (c.n_values.size() < 4)
        throw UsageError("--n: the rate study needs at least 4 sample sizes");
      experiments::RunConfig base;
      base.dataset = c.dataset();
      base.est = c.estimator();
      base.replications = c.replications;
      base.seed_base = c.seed;
      base.jobs = c.jobs;
      double x = c.design_x0;
      double truth = testbed::eval_target(base.dataset.target, x);
      auto tgt = base.dataset.target;
      rvdesign::ModulusSpec modulus =
          tgt.kind == testbed::TargetKind::HolderCusp
              ? rvdesign::ModulusSpec(tgt.cusp_s, std::max(tgt.cusp_r, 1e-12))
              : rvdesign::ModulusSpec(2.0, 1.0);
      auto study = experiments::rate_study(base, c.n_values, x, truth, modulus);
      std::string path = guard.track(outpath("rate.csv"));
      experiments::write_rate_csv(path, study);
      std::cout << "rate: slope=" << study.fit.slope << " stderr=" << study.fit.stderr_value
                << " theoretical=" << study.theoretical_exponent << " ("
                << study.fit.points_used << " points) -> " << path << "\n";
      return 0;
    }
    case Subcommand::Concentration: {
      auto rows = experiments::concentration_check(c.design(), c.window_h, c.n_values.front(),
                                                   c.replications, c.seed);
      std::string path = guard.track(outpath("concentration.csv"));
      experiments::write_concentration_csv(path, rows);
      bool all_ok = true;
      for (const auto& row : rows) all_ok = all_ok && row.within_bound;
      std::cout << "concentration: " << rows.size() << " eps levels, within bound: "
                << (all_ok ? "yes" : "NO") << " -> " << path << "\n";
      return all_ok ? 0 : 1;
    }
    case Subcommand::Gap: {
      experiments::GapConfig gap;
      gap.s1 = c.s1;
      gap.s2 = c.s2;
      gap.r1 = c.r1;
      gap.r2 = c.r2;
      gap.design = c.design();
      gap.sigma = c.gap_sigma;
      gap.n_values = c.n_values;
      gap.replications = c.replications;
      gap.seed_base = c.seed;
      gap.est = c.estimator();
      gap.p = c.p;
      gap.jobs = c.jobs;
      auto rows = experiments::adaptation_gap_report(gap);
      std::string path = guard.track(outpath("gap.csv"));
      experiments::write_gap_csv(path, rows);
      std::cout << "gap: " << rows.size() << " rows over " << c.n_values.size()
                << " sample sizes -> " << path << "\n";
      return 0;
    }
  }
  return 1;
}

} // namespace

int run(const CliConfig& config) {
  OutputGuard guard;
  int status = run_impl(config, guard);
  if (status == 0) guard.release();
  return status;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  CliConfig config;
  std::string help_text;
  try {
    if (!parse_args(args, config, help_text)) {
      std::cout << help_text;
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    return run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace adalopo::cli
