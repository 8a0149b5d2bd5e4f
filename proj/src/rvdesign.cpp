#include "adalopo/rvdesign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adalopo/rng.hpp"

namespace adalopo::rvdesign {

namespace {

void check_beta(double beta) {
  if (!(beta > -1.0)) throw std::domain_error("design index beta must exceed -1");
}

} // namespace

DesignSpec DesignSpec::uniform(double x0) {
  if (x0 < 0.0 || x0 > 1.0) throw std::invalid_argument("x0 must lie in [0,1]");
  return DesignSpec{x0, 0.0, DesignKind::Uniform, 0.0};
}

DesignSpec DesignSpec::power_law(double x0, double beta) {
  if (x0 < 0.0 || x0 > 1.0) throw std::invalid_argument("x0 must lie in [0,1]");
  check_beta(beta);
  return DesignSpec{x0, beta, DesignKind::PowerLaw, 0.0};
}

DesignSpec DesignSpec::power_log_law(double beta, double alpha) {
  check_beta(beta);
  return DesignSpec{0.5, beta, DesignKind::PowerLogLaw, alpha};
}

double DesignSpec::power_law_scale() const {
  return (beta + 1.0) / (std::pow(x0, beta + 1.0) + std::pow(1.0 - x0, beta + 1.0));
}

ModulusSpec::ModulusSpec(double s_, double r_, double gamma_) : s(s_), r(r_), gamma(gamma_) {
  if (!(s > 0.0)) throw std::invalid_argument("modulus exponent s must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("modulus radius r must be positive");
  // monotonicity check on a log grid of (0, hbar]
  double hbar = monotone_upper();
  double prev = 0.0;
  for (int i = 0; i < 40; ++i) {
    double h = hbar * std::pow(1e-8, 1.0 - (i + 1) / 40.0);
    double w = (*this)(h);
    if (w + 1e-15 < prev)
      throw std::invalid_argument("modulus is not nondecreasing on (0, hbar]");
    prev = w;
  }
}

double ModulusSpec::operator()(double h) const {
  if (!(h > 0.0)) return 0.0;
  if (gamma == 0.0) return r * std::pow(h, s);
  return r * std::pow(h, s) * std::pow(std::log(1.0 / h), gamma);
}

double ModulusSpec::monotone_upper() const {
  if (gamma > 0.0) return std::exp(-gamma / s);
  if (gamma < 0.0) return 1.0 - 1e-9; // omega blows up at h = 1
  return 1.0;
}

double c_alpha_beta(int alpha, double beta) {
  if (alpha < 0) throw std::domain_error("c_alpha_beta: alpha must be nonnegative");
  check_beta(beta);
  if (alpha % 2 == 1) return 0.0;
  return 2.0 * (beta + 1.0) / (alpha + beta + 1.0);
}

LimitMatrix limit_matrix(int kappa, double beta) {
  if (kappa < 0 || kappa > 10) throw std::invalid_argument("limit_matrix: kappa must be in [0,10]");
  check_beta(beta);
  LimitMatrix out;
  out.kappa = kappa;
  out.beta = beta;
  out.entries = SymMatrix(kappa + 1);
  for (int j = 0; j <= kappa; ++j)
    for (int l = j; l <= kappa; ++l)
      out.entries.set(j, l, c_alpha_beta(j + l, beta) /
                                std::sqrt(c_alpha_beta(2 * j, beta) * c_alpha_beta(2 * l, beta)));
  out.lambda_min = smallest_eigenvalue(out.entries);
  return out;
}

double design_pdf(const DesignSpec& spec, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("design_pdf: x must lie in [0,1]");
  switch (spec.kind) {
    case DesignKind::Uniform:
      return 1.0;
    case DesignKind::PowerLaw: {
      double d = std::abs(x - spec.x0);
      if (d == 0.0) {
        if (spec.beta < 0.0) return std::numeric_limits<double>::infinity();
        if (spec.beta == 0.0) return spec.power_law_scale();
        return 0.0;
      }
      return spec.power_law_scale() * std::pow(d, spec.beta);
    }
    case DesignKind::PowerLogLaw: {
      // d/dh [h^{b+1} (log(1/h))^a] = h^b (log(1/h))^{a-1} ((b+1) log(1/h) - a)
      double d = std::abs(x - spec.x0);
      if (d == 0.0) throw std::domain_error("design_pdf: PowerLogLaw not evaluated at x0");
      double lg = std::log(1.0 / d);
      return std::pow(d, spec.beta) * std::pow(lg, spec.alpha - 1.0) *
             ((spec.beta + 1.0) * lg - spec.alpha);
    }
  }
  return 0.0;
}

double design_cdf(const DesignSpec& spec, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  switch (spec.kind) {
    case DesignKind::Uniform:
      return x;
    case DesignKind::PowerLaw: {
      double b1 = spec.beta + 1.0;
      double total = std::pow(spec.x0, b1) + std::pow(1.0 - spec.x0, b1);
      if (x <= spec.x0) return (std::pow(spec.x0, b1) - std::pow(spec.x0 - x, b1)) / total;
      return (std::pow(spec.x0, b1) + std::pow(x - spec.x0, b1)) / total;
    }
    case DesignKind::PowerLogLaw:
      throw std::domain_error("design_cdf: PowerLogLaw designs are rate-only");
  }
  return 0.0;
}

double design_cdf_inverse(const DesignSpec& spec, double u) {
  u = std::clamp(u, 0.0, 1.0);
  switch (spec.kind) {
    case DesignKind::Uniform:
      return u;
    case DesignKind::PowerLaw: {
      double b1 = spec.beta + 1.0;
      double left = std::pow(spec.x0, b1);
      double total = left + std::pow(1.0 - spec.x0, b1);
      double mass = u * total;
      double x = mass <= left ? spec.x0 - std::pow(left - mass, 1.0 / b1)
                              : spec.x0 + std::pow(mass - left, 1.0 / b1);
      return std::clamp(x, 0.0, 1.0); // the closed form can overshoot by 1 ulp
    }
    case DesignKind::PowerLogLaw:
      throw std::domain_error("design_cdf_inverse: PowerLogLaw designs are rate-only");
  }
  return 0.0;
}

std::vector<double> sample_design(const DesignSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_design: n must be positive");
  CounterRng rng = CounterRng::substream(seed, 1);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = design_cdf_inverse(spec, rng.uniform(i));
  std::sort(xs.begin(), xs.end());
  return xs;
}

double f_nu_integral(const DesignSpec& spec, double h) {
  if (!(h > 0.0)) throw std::domain_error("f_nu_integral: h must be positive");
  switch (spec.kind) {
    case DesignKind::Uniform:
      return h;
    case DesignKind::PowerLaw:
      return spec.power_law_scale() * std::pow(h, spec.beta + 1.0) / (spec.beta + 1.0);
    case DesignKind::PowerLogLaw:
      if (h >= 1.0) throw std::domain_error("f_nu_integral: PowerLogLaw requires h < 1");
      return std::pow(h, spec.beta + 1.0) * std::pow(std::log(1.0 / h), spec.alpha);
  }
  return 0.0;
}

namespace {

// Signed balance residual omega(h) sqrt(2 n F_nu(h)) - sigma sqrt(L);
// strictly increasing in h for the supported families.
double balance_gap(const RateModel& m, double n, double level, double h) {
  return m.modulus(h) * std::sqrt(2.0 * n * f_nu_integral(m.design, h)) - m.sigma * std::sqrt(level);
}

} // namespace

double deterministic_bandwidth(const RateModel& model, double n, bool with_log) {
  if (!(n > 1.0)) throw std::invalid_argument("deterministic_bandwidth: n must exceed 1");
  if (!(model.sigma > 0.0)) throw std::invalid_argument("deterministic_bandwidth: sigma must be positive");
  const double level = with_log ? std::log(n) : 1.0;
  double hi = model.modulus.monotone_upper();
  if (model.design.kind == DesignKind::PowerLogLaw) {
    // F_nu = h^{beta+1}(log(1/h))^alpha increases only below exp(-alpha/(beta+1));
    // the family is a small-h model and the search stays in that region
    hi = std::min(hi, 1.0 - 1e-9);
    if (model.design.alpha > 0.0)
      hi = std::min(hi, std::exp(-model.design.alpha / (model.design.beta + 1.0)));
  }
  const double lo = 1e-12;
  if (balance_gap(model, n, level, hi) < 0.0)
    throw NoRootError("deterministic_bandwidth: omega too small at h = 1 (n too small)");
  if (balance_gap(model, n, level, lo) >= 0.0) return lo;
  double llo = std::log(lo), lhi = std::log(hi);
  for (int it = 0; it < 200 && lhi - llo > 1e-12; ++it) {
    double mid = 0.5 * (llo + lhi);
    (balance_gap(model, n, level, std::exp(mid)) >= 0.0 ? lhi : llo) = mid;
  }
  return std::exp(lhi);
}

double theoretical_rate(const RateModel& model, double n, bool adaptive) {
  return model.modulus(deterministic_bandwidth(model, n, adaptive));
}

double lambert_inverse_asymptotic(double a, double b, double h) {
  if (!(b > 0.0)) throw std::domain_error("lambert_inverse_asymptotic: b must be positive");
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("lambert_inverse_asymptotic: h must lie in (0,1)");
  return std::pow(b, a / b) * std::pow(h, 1.0 / b) * std::pow(std::log(1.0 / h), -a / b);
}

double holder_rate_asymptotic(const RateModel& model, double n, bool adaptive) {
  if (model.modulus.gamma != 0.0)
    throw std::domain_error("holder_rate_asymptotic: requires a Hoelder modulus (gamma = 0)");
  double cf; // F_nu(h) = cf * h^{beta+1}
  switch (model.design.kind) {
    case DesignKind::Uniform:
      cf = 1.0;
      break;
    case DesignKind::PowerLaw:
      cf = model.design.power_law_scale() / (model.design.beta + 1.0);
      break;
    default:
      throw std::domain_error("holder_rate_asymptotic: requires a pure power design");
  }
  const double s = model.modulus.s, beta = model.design.beta, q = 1.0 + 2.0 * s + beta;
  const double level = adaptive ? std::log(n) : 1.0;
  return std::pow(model.sigma, 2.0 * s / q) * std::pow(model.modulus.r, (beta + 1.0) / q) *
         std::pow(2.0 * cf, -s / q) * std::pow(level / n, s / q);
}

double powerlog_bandwidth_asymptotic(const RateModel& model, double n) {
  if (model.design.kind != DesignKind::PowerLogLaw)
    throw std::domain_error("powerlog_bandwidth_asymptotic: requires a PowerLogLaw design");
  const double s = model.modulus.s, beta = model.design.beta, q = 1.0 + 2.0 * s + beta;
  const double e = model.design.alpha + 2.0 * model.modulus.gamma;
  return std::pow(q, e / q) * std::pow(model.sigma / model.modulus.r, 2.0 / q) *
         std::pow(2.0 * n * std::pow(std::log(n), e - 1.0), -1.0 / q);
}

bool in_holder_class(const std::function<double(double)>& f, double x0,
                     const ModulusSpec& modulus, const std::vector<double>& radii) {
  int k = static_cast<int>(std::ceil(modulus.s)) - 1; // largest integer smaller than s
  if (k < 0) k = 0;
  const int grid = 512;
  for (double h : radii) {
    double lo = std::max(0.0, x0 - h), hi = std::min(1.0, x0 + h);
    // least-squares polynomial of degree k in (x - x0) over the grid
    SymMatrix gram(k + 1);
    std::vector<double> rhs(k + 1, 0.0);
    std::vector<double> mom(2 * k + 1, 0.0);
    std::vector<double> vals(grid + 1);
    for (int i = 0; i <= grid; ++i) {
      double x = lo + (hi - lo) * i / grid;
      double d = x - x0;
      vals[i] = f(x);
      double p = 1.0;
      for (int q = 0; q <= 2 * k; ++q) {
        mom[q] += p;
        if (q <= k) rhs[q] += vals[i] * p;
        p *= d;
      }
    }
    for (int j = 0; j <= k; ++j)
      for (int l = j; l <= k; ++l) gram.set(j, l, mom[j + l]);
    std::vector<double> theta;
    try {
      theta = solve_symmetric(gram, rhs);
    } catch (const SingularSystemError&) {
      return false;
    }
    double sup = 0.0;
    for (int i = 0; i <= grid; ++i) {
      double x = lo + (hi - lo) * i / grid;
      double d = x - x0, p = 1.0, approx = 0.0;
      for (int q = 0; q <= k; ++q) {
        approx += theta[q] * p;
        p *= d;
      }
      sup = std::max(sup, std::abs(vals[i] - approx));
    }
    if (sup > modulus(h) * (1.0 + 1e-9) + 1e-12) return false;
  }
  return true;
}

} // namespace adalopo::rvdesign
