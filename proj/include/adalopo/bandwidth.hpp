#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "adalopo/locpoly.hpp"
#include "adalopo/rvdesign.hpp"

namespace adalopo::bandwidth {

//! Raised by build_grid when no grid index is generated.
struct EmptyGridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Raised by build_interval_grid when the query point is far outside the
//! data range.
struct OutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Raised by ideal_bandwidth when the defining set is empty.
struct UndefinedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GridKind { Arith, Geom };

//! Bandwidth grid over the distances h_i = |X_(i) - x0| (X re-sorted by
//! distance to x0):
//!   Arith(a >= 1): { h_{2+[i a]} : i = 1..[(n-2)/a] }
//!   Geom(a > 1):   { h_{[a^i]}  : i = 1..[log_a n] }
//! Values are sorted ascending and deduplicated.
struct GridSpec {
  GridKind kind = GridKind::Geom;
  double a = 1.05;
  std::vector<double> values;
};

GridSpec build_grid(const locpoly::SampleSet& data, double x0, GridKind kind, double a);

//! Threshold of the symmetric selection rule:
//!   C_k sqrt(C_p log(N_h) / N_hp) + second term, with C_k = 1+sqrt(kappa+1)
//! and C_p = 8(1+2p); the second term is sqrt(log(n)/(N_h - a)) on
//! arithmetical grids and sqrt((1+a) log(n)/N_h) on geometrical ones.
//! Throws std::domain_error for an arithmetical grid with N_h <= a.
double threshold_symmetric(std::size_t n, std::size_t n_hp, std::size_t n_h, int kappa,
                           double p, GridKind kind, double a);

struct SelectionResult {
  locpoly::Window window;
  locpoly::LocalFit fit;
  std::size_t tested = 0;      // candidate windows examined
  bool no_admissible = false;  // every candidate failed; smallest returned

  //! First violated test per rejected candidate.
  struct Rejection {
    locpoly::Window candidate;
    locpoly::Window sub;
    int coordinate = 0;
  };
  std::vector<Rejection> rejections;
};

//! Symmetric Lepski-type rule: the largest grid bandwidth h whose fit stays,
//! for every smaller grid bandwidth h' and coordinate j, within
//! sigma ||phi_j||_{h'} T_{n,h',h} of the h' fit. The scan runs from the
//! largest h downward and stops at the first fully passing candidate; the
//! smallest grid bandwidth passes vacuously.
SelectionResult select_bandwidth_symmetric(const locpoly::SampleSet& data, double x0, int kappa,
                                           double p, const GridSpec& grid, double sigma);

//! Asymmetric interval grid around the m sample points nearest to x.
//! With the seed spanning order statistics [X_(jL), X_(jR)], the endpoint
//! sets are X_(jL+1-[a^i]) on the left and X_(jR-1+[a^i]) on the right
//! (i = 0, 1, ...), clamped to the data range and deduplicated, so every
//! candidate interval contains the seed.
struct IntervalGrid {
  std::vector<double> left;   // candidate lower endpoints, ascending
  std::vector<double> right;  // candidate upper endpoints, ascending
  std::size_t seed_first = 0; // index range of the seed points
  std::size_t seed_last = 0;  // one past the last seed point

  //! Product intervals sorted by count (desc), then length (desc), then
  //! lower endpoint (asc): the candidate examination order.
  std::vector<std::pair<double, double>> intervals;
};

IntervalGrid build_interval_grid(const locpoly::SampleSet& data, double x, double a,
                                 std::size_t m);

struct IntervalSelectorOptions {
  //! Reproduces the printed threshold, where sigma_hat scales only the
  //! first term. The default scales both terms for dimensional consistency
  //! with the raw scalar product.
  bool paper_literal_threshold = false;
};

//! Asymmetric interval rule: among grid intervals I whose raw fit stays
//! within T_{I,J} of every contained grid interval J (in the H_J norm),
//! returns one maximizing N_{n,I}; ties prefer longer intervals, then the
//! leftmost lower endpoint. The estimate is the first fitted coefficient.
//! T_{I,J} = sigma_hat (1+sqrt(kappa+1)) sqrt(log N_I)
//!           + [sigma_hat] sqrt(1+a) sqrt((N_J/N_I) log n).
SelectionResult select_interval(const locpoly::SampleSet& data, double x, int kappa, double a,
                                std::size_t m, double sigma_hat,
                                const IntervalSelectorOptions& opts = {});

//! Ideal adaptive bandwidth: smallest h with
//! omega(h) >= sigma sqrt(log(n) / N_{n,h}), located by scanning the sorted
//! distances |X_i - x0| (N_{n,h} is a right-continuous step function). When
//! the defining inequality first holds beyond the largest distance, the
//! exact crossing is bisected on the constant-count tail. Also reports the
//! random rate sigma sqrt(log(n) / N) at the returned bandwidth.
struct IdealBandwidth {
  double h = 0.0;
  double rate = 0.0;
  std::size_t count = 0;
};

IdealBandwidth ideal_bandwidth(const locpoly::SampleSet& data, double x0,
                               const rvdesign::ModulusSpec& modulus, double sigma);

//! Noise level from successive response differences (X-sorted):
//! sigma^2 = sum (Y_(i+1) - Y_(i))^2 / (2(n-1)). Throws for n < 2.
double estimate_sigma(const locpoly::SampleSet& data);

} // namespace adalopo::bandwidth
