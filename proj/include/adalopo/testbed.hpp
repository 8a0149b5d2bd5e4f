#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adalopo/locpoly.hpp"
#include "adalopo/rvdesign.hpp"

namespace adalopo::testbed {

enum class TargetKind { Blocks, Bumps, Heavysine, Doppler, HolderCusp, Custom };

//! Benchmark regression targets on [0,1]. Blocks/Bumps/Heavysine/Doppler use
//! the standard published parameterizations (knots, heights and widths are
//! pinned below in the implementation); HolderCusp(s, x0, r) is
//! f(x) = r |x - x0|^s; Custom interpolates a tabulated function linearly.
struct TargetFunction {
  TargetKind kind = TargetKind::Heavysine;
  double cusp_s = 1.0;
  double cusp_x0 = 0.5;
  double cusp_r = 1.0;
  std::vector<std::pair<double, double>> table; // Custom: sorted by x

  double operator()(double x) const;

  static TargetFunction blocks();
  static TargetFunction bumps();
  static TargetFunction heavysine();
  static TargetFunction doppler();
  static TargetFunction holder_cusp(double s, double x0 = 0.5, double r = 1.0);
  static TargetFunction custom(std::vector<std::pair<double, double>> table);
  static TargetFunction by_name(const std::string& name); // CLI lookup

  std::string name() const;
};

double eval_target(const TargetFunction& t, double x);

//! Standard deviation of the target over a 10^4-point uniform grid
//! (midpoints (i+0.5)/10^4, population convention); this is the signal scale
//! used to convert a root signal-to-noise ratio into a noise level.
double target_sd_grid(const TargetFunction& t);

struct DatasetSpec {
  TargetFunction target;
  rvdesign::DesignSpec design;
  std::size_t n = 2000;
  double rsnr = 7.0; // +infinity yields noiseless data
  std::uint64_t seed = 0;
};

//! Synthesized dataset plus its provenance.
struct Dataset {
  locpoly::SampleSet samples;
  double sigma = 0.0;   // true noise level, sd_grid / rsnr
  double sd_grid = 0.0; // signal scale used for the conversion
  DatasetSpec spec;
};

//! X sampled through the design's inverse CDF, Gaussian noise from the
//! counter-based stream, output sorted by X. Bit-reproducible per seed.
Dataset synthesize(const DatasetSpec& spec);

//! CSV export: header "x,y", rows sorted by x, 17 significant digits.
//! Provenance goes to a sidecar "<path>.meta" of "key = value" lines.
void save_csv(const Dataset& data, const std::string& path);

//! Reads a dataset written by save_csv; the sidecar is optional (sigma and
//! spec fields default when absent).
Dataset load_csv(const std::string& path);

//! Locale-independent shortest-round-trip formatting (17 significant
//! digits), the numeric format of every file this project writes.
std::string format_double(double v);

} // namespace adalopo::testbed
