#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "adalopo/linalg.hpp"

namespace adalopo::rvdesign {

//! Raised by the balance-equation solvers when no root exists in (0, 1].
struct NoRootError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DesignKind { Uniform, PowerLaw, PowerLogLaw };

//! Design density regularly varying at x0 with index beta.
//!
//! PowerLaw is the normalized density
//!   mu(x) = (beta+1) / (x0^{beta+1} + (1-x0)^{beta+1}) * |x - x0|^beta
//! on [0,1]. PowerLogLaw is specified through its one-sided integral
//! F_nu(h) = h^{beta+1} (log(1/h))^alpha and is used for rate computations
//! only (it is not normalized; sampling is unsupported for it).
struct DesignSpec {
  double x0 = 0.5;
  double beta = 0.0;
  DesignKind kind = DesignKind::Uniform;
  double alpha = 0.0; // PowerLogLaw log exponent

  static DesignSpec uniform(double x0 = 0.5);
  static DesignSpec power_law(double x0, double beta);
  static DesignSpec power_log_law(double beta, double alpha);

  //! Normalization constant of the PowerLaw density.
  double power_law_scale() const;
};

//! Smoothness modulus omega(h) = r * h^s * (log(1/h))^gamma.
//!
//! gamma = 0 is classical Hoelder smoothness s with radius r. The modulus is
//! nondecreasing on (0, hbar] with hbar = exp(-gamma/s) for gamma > 0 and
//! hbar = 1 otherwise; the constructor checks this on a grid.
struct ModulusSpec {
  double s = 1.0;
  double r = 1.0;
  double gamma = 0.0;

  ModulusSpec() = default;
  ModulusSpec(double s_, double r_, double gamma_ = 0.0);

  double operator()(double h) const;

  //! Upper end of the monotone range (and of balance-equation brackets).
  double monotone_upper() const;
};

//! Inputs of the theoretical rate evaluators.
struct RateModel {
  ModulusSpec modulus;
  DesignSpec design;
  double sigma = 1.0;
};

//! Limit normalized moment matrix G with entries
//! C_{j+l,beta} / sqrt(C_{2j,beta} C_{2l,beta}) and its smallest eigenvalue.
struct LimitMatrix {
  int kappa = 0;
  double beta = 0.0;
  SymMatrix entries;
  double lambda_min = 0.0;
};

//! C_{alpha,beta} = (1 + (-1)^alpha) (beta+1) / (alpha+beta+1).
//! Limit of the normalized window moments of order alpha under a design
//! regularly varying with index beta. Throws std::domain_error for
//! beta <= -1 or alpha < 0.
double c_alpha_beta(int alpha, double beta);

//! Limit matrix for polynomial degree kappa (kappa <= 10).
LimitMatrix limit_matrix(int kappa, double beta);

//! Density value at x in [0,1]. For beta < 0 the PowerLaw density has a pole
//! at x0 and +infinity is returned there; samplers must go through the CDF.
//! For PowerLogLaw returns the (unnormalized) derivative of F_nu, never
//! evaluated at distance zero.
double design_pdf(const DesignSpec& spec, double x);

//! Distribution function on [0,1] (PowerLaw/Uniform only).
double design_cdf(const DesignSpec& spec, double x);

//! Exact inverse CDF; closed form, monotone nondecreasing in u.
double design_cdf_inverse(const DesignSpec& spec, double u);

//! n i.i.d. draws via inverse CDF of counter-based uniforms, sorted
//! ascending. Reproducible for a fixed seed.
std::vector<double> sample_design(const DesignSpec& spec, std::size_t n, std::uint64_t seed);

//! One-sided integral F_nu(h) = int_0^h nu(t) dt, closed form.
//! Throws std::domain_error for h <= 0.
double f_nu_integral(const DesignSpec& spec, double h);

//! Smallest h solving the bias/variance balance
//!   omega(h) = sigma * sqrt(L / (2 n F_nu(h))),  L = log n (with_log) or 1.
//! Log-space bisection to relative tolerance 1e-12; the left-hand side times
//! sqrt(F_nu) is strictly increasing for the supported modulus families, so
//! the root is unique. Multi-root moduli are unsupported.
//! n is real-valued: the balance equation is continuous in n.
double deterministic_bandwidth(const RateModel& model, double n, bool with_log);

//! omega evaluated at the balance root: the adaptive rate (with log n) or
//! the minimax rate (without).
double theoretical_rate(const RateModel& model, double n, bool adaptive);

//! Asymptotic inverse of G(h) = h^b (log(1/h))^a for small h:
//!   G^{-1}(h) ~ b^{a/b} h^{1/b} (log(1/h))^{-a/b}.
//! Throws std::domain_error for h >= 1 or b <= 0.
double lambert_inverse_asymptotic(double a, double b, double h);

//! Closed-form rate for Hoelder moduli (gamma = 0) over pure power designs
//! (Uniform/PowerLaw), written with the conventional exponents on sigma and
//! r:  sigma^{2s/q} r^{(beta+1)/q} (2 C_F)^{-s/q} (L/n)^{s/q},
//! where q = 1+2s+beta and F_nu(h) = C_F h^{beta+1}. For these families the
//! balance equation solves in closed form, so this equals theoretical_rate
//! up to roundoff; it serves as an independent cross-check of the root
//! finder and of the rate constants.
double holder_rate_asymptotic(const RateModel& model, double n, bool adaptive);

//! Asymptotic balance root for PowerLogLaw designs and log-power moduli:
//!   q^{(alpha+2 gamma)/q} (sigma/r)^{2/q} (2 n (log n)^{alpha+2 gamma-1})^{-1/q}
//! with q = 1+2s+beta. Cross-checks deterministic_bandwidth as n grows.
double powerlog_bandwidth_asymptotic(const RateModel& model, double n);

//! Grid check of Hoelder-class membership at x0: for each window radius h,
//! fits a least-squares polynomial of degree k (largest integer smaller
//! than s) on a dense grid over [x0-h, x0+h] and verifies
//! sup |f - P| <= omega(h). A pass certifies membership (the least-squares
//! sup error dominates the best-approximation error).
bool in_holder_class(const std::function<double(double)>& f, double x0,
                     const ModulusSpec& modulus, const std::vector<double>& radii);

} // namespace adalopo::rvdesign
