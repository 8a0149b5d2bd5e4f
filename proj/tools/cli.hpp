#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adalopo/experiments.hpp"

namespace adalopo::cli {

//! Bad command line; the message names the offending flag or value.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Subcommand { Synth, Estimate, Risk, Rate, Concentration, Gap };

struct CliConfig {
  Subcommand subcommand = Subcommand::Estimate;

  std::string target = "heavysine";
  double design_x0 = 0.5;
  double design_beta = 0.0; // 0 selects the uniform design
  std::vector<std::size_t> n_values = {2000};
  double rsnr = 7.0;
  std::uint64_t seed = 0;

  int kappa = 2;
  double a = 1.05;
  std::size_t m = 25;
  double p = 2.0;
  experiments::EstimatorParams estimator() const;
  std::string grid = "geom";
  std::string sigma_mode = "estimate";
  std::string selector = "interval";
  bool paper_literal_threshold = false;

  int eval_grid = 300; // points x = j/eval_grid, j = 0..eval_grid
  std::size_t replications = 200;
  int jobs = 1;
  double window_h = 0.1; // concentration radius
  double s1 = 1.0, s2 = 2.0, r1 = 1.0, r2 = 0.5;
  double gap_sigma = 0.15;

  std::string out_dir = ".";
  std::string config_file;
  std::string input_path;

  rvdesign::DesignSpec design() const;
  testbed::DatasetSpec dataset() const; // uses n_values.front()
};

//! Parses flags (flags override config-file values override defaults; the
//! ADALOPO_SEED environment variable is the seed default of last resort).
//! Throws UsageError on bad input; fills `help_text` and returns false when
//! --help was requested.
bool parse_args(const std::vector<std::string>& args, CliConfig& config, std::string& help_text);

//! Dispatches the subcommand, writes outputs under config.out_dir and prints
//! a one-line summary. Returns the process exit status; partial outputs are
//! removed on failure.
int run(const CliConfig& config);

//! parse + run + error reporting; the main() body.
int main_entry(int argc, char** argv);

} // namespace adalopo::cli
