#include "adalopo/testbed.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "adalopo/rng.hpp"

namespace adalopo::testbed {

namespace {

constexpr double kPi = 3.14159265358979323846;

// knots shared by blocks and bumps
constexpr std::array<double, 11> kKnots = {0.10, 0.13, 0.15, 0.23, 0.25, 0.40,
                                           0.44, 0.65, 0.76, 0.78, 0.81};
constexpr std::array<double, 11> kBlockHeights = {4.0,  -5.0, 3.0, -4.0, 5.0, -4.2,
                                                  2.1,  4.3,  -3.1, 2.1, -4.2};
constexpr std::array<double, 11> kBumpHeights = {4.0, 5.0, 3.0, 4.0, 5.0, 4.2,
                                                 2.1, 4.3, 3.1, 5.1, 4.2};
constexpr std::array<double, 11> kBumpWidths = {0.005, 0.005, 0.006, 0.01,  0.01, 0.03,
                                                0.01,  0.01,  0.005, 0.008, 0.005};

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

TargetFunction of_kind(TargetKind kind) {
  TargetFunction t;
  t.kind = kind;
  return t;
}

} // namespace

double TargetFunction::operator()(double x) const { return eval_target(*this, x); }

TargetFunction TargetFunction::blocks() { return of_kind(TargetKind::Blocks); }
TargetFunction TargetFunction::bumps() { return of_kind(TargetKind::Bumps); }
TargetFunction TargetFunction::heavysine() { return of_kind(TargetKind::Heavysine); }
TargetFunction TargetFunction::doppler() { return of_kind(TargetKind::Doppler); }

TargetFunction TargetFunction::holder_cusp(double s, double x0, double r) {
  if (!(s > 0.0)) throw std::invalid_argument("holder_cusp: s must be positive");
  TargetFunction t = of_kind(TargetKind::HolderCusp);
  t.cusp_s = s;
  t.cusp_x0 = x0;
  t.cusp_r = r;
  return t;
}

TargetFunction TargetFunction::custom(std::vector<std::pair<double, double>> table) {
  if (table.size() < 2) throw std::invalid_argument("custom target: need at least two rows");
  std::sort(table.begin(), table.end());
  TargetFunction t = of_kind(TargetKind::Custom);
  t.table = std::move(table);
  return t;
}

TargetFunction TargetFunction::by_name(const std::string& name) {
  if (name == "blocks") return blocks();
  if (name == "bumps") return bumps();
  if (name == "heavysine") return heavysine();
  if (name == "doppler") return doppler();
  if (name.rfind("cusp", 0) == 0) {
    // cusp or cusp:<s>[:<x0>[:<r>]]
    double s = 1.0, x0 = 0.5, r = 1.0;
    std::string rest = name.size() > 4 && name[4] == ':' ? name.substr(5) : "";
    if (!rest.empty()) {
      std::stringstream ss(rest);
      std::string tok;
      double* slots[3] = {&s, &x0, &r};
      for (int i = 0; i < 3 && std::getline(ss, tok, ':'); ++i) *slots[i] = std::stod(tok);
    }
    return holder_cusp(s, x0, r);
  }
  throw std::invalid_argument("unknown target '" + name + "'");
}

std::string TargetFunction::name() const {
  switch (kind) {
    case TargetKind::Blocks: return "blocks";
    case TargetKind::Bumps: return "bumps";
    case TargetKind::Heavysine: return "heavysine";
    case TargetKind::Doppler: return "doppler";
    case TargetKind::HolderCusp: {
      std::ostringstream os;
      os << "cusp:" << cusp_s << ":" << cusp_x0 << ":" << cusp_r;
      return os.str();
    }
    case TargetKind::Custom: return "custom";
  }
  return "?";
}

double eval_target(const TargetFunction& t, double x) {
  switch (t.kind) {
    case TargetKind::Blocks: {
      double acc = 0.0;
      for (std::size_t j = 0; j < kKnots.size(); ++j)
        acc += kBlockHeights[j] * 0.5 * (1.0 + sgn(x - kKnots[j]));
      return acc;
    }
    case TargetKind::Bumps: {
      double acc = 0.0;
      for (std::size_t j = 0; j < kKnots.size(); ++j) {
        double u = std::abs((x - kKnots[j]) / kBumpWidths[j]);
        acc += kBumpHeights[j] * std::pow(1.0 + u, -4.0);
      }
      return acc;
    }
    case TargetKind::Heavysine:
      return 4.0 * std::sin(4.0 * kPi * x) - sgn(x - 0.3) - sgn(0.72 - x);
    case TargetKind::Doppler: {
      double v = std::max(x * (1.0 - x), 0.0);
      return std::sqrt(v) * std::sin(2.0 * kPi * 1.05 / (x + 0.05));
    }
    case TargetKind::HolderCusp:
      return t.cusp_r * std::pow(std::abs(x - t.cusp_x0), t.cusp_s);
    case TargetKind::Custom: {
      const auto& tb = t.table;
      if (x <= tb.front().first) return tb.front().second;
      if (x >= tb.back().first) return tb.back().second;
      auto it = std::upper_bound(tb.begin(), tb.end(), std::make_pair(x, std::numeric_limits<double>::infinity()));
      auto lo = it - 1;
      double w = (x - lo->first) / (it->first - lo->first);
      return lo->second + w * (it->second - lo->second);
    }
  }
  return 0.0;
}

double target_sd_grid(const TargetFunction& t) {
  const int n = 10000;
  double mean = 0.0;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = eval_target(t, (i + 0.5) / n);
    mean += v[i];
  }
  mean /= n;
  double ss = 0.0;
  for (double y : v) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / n);
}

Dataset synthesize(const DatasetSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("synthesize: n must be positive");
  if (!(spec.rsnr > 0.0)) throw std::invalid_argument("synthesize: rsnr must be positive");
  Dataset out;
  out.spec = spec;
  out.sd_grid = target_sd_grid(spec.target);
  out.sigma = std::isinf(spec.rsnr) ? 0.0 : out.sd_grid / spec.rsnr;

  std::vector<double> xs = rvdesign::sample_design(spec.design, spec.n, spec.seed);
  std::vector<double> ys(spec.n);
  CounterRng noise = CounterRng::substream(spec.seed, 2);
  for (std::size_t i = 0; i < spec.n; ++i) {
    ys[i] = eval_target(spec.target, xs[i]);
    if (out.sigma > 0.0) ys[i] += out.sigma * noise.gaussian(i);
  }
  out.samples = locpoly::SampleSet::from_sorted(std::move(xs), std::move(ys), spec.seed);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "'");
  out << "x,y\n";
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    out << format_double(data.samples.xs[i]) << "," << format_double(data.samples.ys[i]) << "\n";
  if (!out) throw std::runtime_error("save_csv: write failed for '" + path + "'");

  std::ofstream meta(path + ".meta");
  if (!meta) throw std::runtime_error("save_csv: cannot open '" + path + ".meta'");
  const auto& spec = data.spec;
  meta << "format = adalopo-dataset-1\n";
  meta << "target = " << spec.target.name() << "\n";
  meta << "design = "
       << (spec.design.kind == rvdesign::DesignKind::Uniform
               ? "uniform"
               : (spec.design.kind == rvdesign::DesignKind::PowerLaw ? "powerlaw" : "powerloglaw"))
       << "\n";
  meta << "design_x0 = " << format_double(spec.design.x0) << "\n";
  meta << "design_beta = " << format_double(spec.design.beta) << "\n";
  meta << "n = " << spec.n << "\n";
  meta << "rsnr = " << format_double(spec.rsnr) << "\n";
  meta << "seed = " << spec.seed << "\n";
  meta << "sigma = " << format_double(data.sigma) << "\n";
  meta << "sd_grid = " << format_double(data.sd_grid) << "\n";
  meta << "sd_grid_points = 10000\n";
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("load_csv: malformed row '" + line + "'");
    xs.push_back(std::stod(line.substr(0, comma)));
    ys.push_back(std::stod(line.substr(comma + 1)));
  }
  Dataset out;
  out.samples = locpoly::SampleSet::from_sorted(std::move(xs), std::move(ys));
  out.spec.n = out.samples.size();

  std::ifstream meta(path + ".meta");
  if (meta) {
    while (std::getline(meta, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key == "sigma") out.sigma = std::stod(val);
      else if (key == "sd_grid") out.sd_grid = std::stod(val);
      else if (key == "seed") {
        out.spec.seed = std::stoull(val);
        out.samples.seed_provenance = out.spec.seed;
      } else if (key == "rsnr") out.spec.rsnr = std::stod(val);
      else if (key == "target" && val != "custom") out.spec.target = TargetFunction::by_name(val);
      else if (key == "design_x0") out.spec.design.x0 = std::stod(val);
      else if (key == "design_beta") out.spec.design.beta = std::stod(val);
      else if (key == "design") {
        if (val == "uniform") out.spec.design.kind = rvdesign::DesignKind::Uniform;
        else if (val == "powerlaw") out.spec.design.kind = rvdesign::DesignKind::PowerLaw;
        else out.spec.design.kind = rvdesign::DesignKind::PowerLogLaw;
      }
    }
  }
  return out;
}

} // namespace adalopo::testbed
