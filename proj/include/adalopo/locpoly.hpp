#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "adalopo/linalg.hpp"

namespace adalopo::locpoly {

//! Raised by normalized_gram when some basis norm vanishes on the window.
struct DegenerateNormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Design/response observations sorted by design point.
struct SampleSet {
  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<std::uint64_t> seed_provenance;

  std::size_t size() const { return xs.size(); }

  //! Validates: sizes match, n >= 1, xs nondecreasing.
  static SampleSet from_sorted(std::vector<double> xs, std::vector<double> ys,
                               std::optional<std::uint64_t> seed = std::nullopt);
  //! Sorts the pairs by x first.
  static SampleSet from_unsorted(std::vector<double> xs, std::vector<double> ys,
                                 std::optional<std::uint64_t> seed = std::nullopt);
};

//! Fitting window with the monomial basis centered at `center`:
//! phi_j(u) = (u - center)^j. Symmetric windows contain the points with
//! |x - x0| <= h (the membership test is evaluated exactly in that form, so
//! a bandwidth equal to a sample distance includes its sample); interval
//! windows are [lo, hi] by value and carry the query point explicitly.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  bool symmetric_form = false; // membership via |x - center| <= radius
  double radius = 0.0;

  static Window symmetric(double x0, double h);
  static Window interval(double lo, double hi, double center);
};

//! ByCount divides scalar products by the window count (symmetric selector);
//! Raw keeps plain sums (asymmetric interval selector, no ridge).
enum class Normalization { ByCount, Raw };

//! Window moment system: matrix_{j,l} = <phi_j, phi_l>, rhs_j = <Y, phi_j>.
struct GramSystem {
  SymMatrix matrix;
  std::vector<double> rhs;
  Normalization norm = Normalization::ByCount;
  std::size_t count = 0;
};

struct LocalFit {
  std::vector<double> theta;  // fitted coefficients, length kappa+1
  std::size_t count = 0;      // points in window
  double lambda_min = 0.0;    // smallest eigenvalue of the (unridged) Gram
  bool regularized = false;   // the N^{-1/2} ridge fired (ByCount only)
  bool omega_event = false;   // lambda(X_h) > N^{-1/2} and N >= 2
  double estimate = 0.0;      // theta[0] = fitted value at the center
};

//! Number of sample points in [w.lo, w.hi]; closed inclusion on both ends,
//! O(log n) by binary search.
std::size_t count_in_window(const SampleSet& data, const Window& w);

//! Builds the window moment system. Powers are accumulated once per point
//! per exponent from centered values (a moment vector of orders 0..2 kappa),
//! not per matrix entry. Zero-count windows yield the zero system.
GramSystem build_gram(const SampleSet& data, const Window& w, int kappa, Normalization norm);

using adalopo::smallest_eigenvalue;

//! Solves the local polynomial system on the window.
//!
//! ByCount: the system matrix is X_h + N^{-1/2} I whenever
//! lambda(X_h) <= N^{-1/2} (always solvable); the zero fit is returned for
//! empty windows. Raw: the plain system, no ridge; throws
//! SingularSystemError when the window holds fewer than kappa+1 distinct
//! points (callers guarantee m >= kappa+1).
LocalFit fit_local(const SampleSet& data, const Window& w, int kappa, Normalization norm);

//! Same solve applied to a prebuilt Gram system (selection fast path).
LocalFit fit_from_gram(const GramSystem& gram);

//! Unit-diagonal normalized moment matrix
//! (G_h)_{j,l} = <phi_j,phi_l>_h / (||phi_j||_h ||phi_l||_h); its smallest
//! eigenvalue is the lambda diagnostic. Throws DegenerateNormError when some
//! ||phi_j||_h vanishes.
SymMatrix normalized_gram(const SampleSet& data, const Window& w, int kappa);

} // namespace adalopo::locpoly
