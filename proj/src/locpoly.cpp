#include "adalopo/locpoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adalopo::locpoly {

SampleSet SampleSet::from_sorted(std::vector<double> xs, std::vector<double> ys,
                                 std::optional<std::uint64_t> seed) {
  if (xs.size() != ys.size()) throw std::invalid_argument("SampleSet: size mismatch");
  if (xs.empty()) throw std::invalid_argument("SampleSet: need at least one observation");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("SampleSet: design points must be nondecreasing");
  return SampleSet{std::move(xs), std::move(ys), seed};
}

SampleSet SampleSet::from_unsorted(std::vector<double> xs, std::vector<double> ys,
                                   std::optional<std::uint64_t> seed) {
  if (xs.size() != ys.size()) throw std::invalid_argument("SampleSet: size mismatch");
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> sx(xs.size()), sy(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sx[i] = xs[idx[i]];
    sy[i] = ys[idx[i]];
  }
  return from_sorted(std::move(sx), std::move(sy), seed);
}

Window Window::symmetric(double x0, double h) {
  if (h < 0.0) throw std::invalid_argument("Window: bandwidth must be nonnegative");
  return Window{x0 - h, x0 + h, x0, true, h};
}

Window Window::interval(double lo, double hi, double center) {
  if (lo > hi) throw std::invalid_argument("Window: lo must not exceed hi");
  return Window{lo, hi, center, false, 0.0};
}

namespace {

// Index range [first, last) of points inside the closed window. Symmetric
// windows evaluate |x - x0| <= h literally (both predicates below are
// monotone along the sorted points), so bandwidths taken from sample
// distances include their defining samples bit-exactly.
std::pair<std::size_t, std::size_t> window_range(const SampleSet& data, const Window& w) {
  if (w.symmetric_form) {
    auto first = std::partition_point(
        data.xs.begin(), data.xs.end(),
        [&](double v) { return v < w.center && w.center - v > w.radius; });
    auto last = std::partition_point(first, data.xs.end(), [&](double v) {
      return std::abs(v - w.center) <= w.radius;
    });
    return {static_cast<std::size_t>(first - data.xs.begin()),
            static_cast<std::size_t>(last - data.xs.begin())};
  }
  auto first = std::lower_bound(data.xs.begin(), data.xs.end(), w.lo);
  auto last = std::upper_bound(data.xs.begin(), data.xs.end(), w.hi);
  return {static_cast<std::size_t>(first - data.xs.begin()),
          static_cast<std::size_t>(last - data.xs.begin())};
}

} // namespace

std::size_t count_in_window(const SampleSet& data, const Window& w) {
  auto [first, last] = window_range(data, w);
  return last - first;
}

GramSystem build_gram(const SampleSet& data, const Window& w, int kappa, Normalization norm) {
  if (kappa < 0 || kappa > 10) throw std::invalid_argument("build_gram: kappa must be in [0,10]");
  auto [first, last] = window_range(data, w);
  GramSystem out;
  out.norm = norm;
  out.count = last - first;
  out.matrix = SymMatrix(kappa + 1);
  out.rhs.assign(kappa + 1, 0.0);
  if (out.count == 0) return out;

  std::vector<long double> mom(2 * kappa + 1, 0.0L);
  std::vector<long double> rhs(kappa + 1, 0.0L);
  for (std::size_t i = first; i < last; ++i) {
    long double d = static_cast<long double>(data.xs[i]) - w.center;
    long double p = 1.0L;
    for (int q = 0; q <= 2 * kappa; ++q) {
      mom[q] += p;
      if (q <= kappa) rhs[q] += data.ys[i] * p;
      p *= d;
    }
  }
  long double scale = (norm == Normalization::ByCount) ? static_cast<long double>(out.count) : 1.0L;
  for (int j = 0; j <= kappa; ++j) {
    for (int l = j; l <= kappa; ++l)
      out.matrix.set(j, l, static_cast<double>(mom[j + l] / scale));
    out.rhs[j] = static_cast<double>(rhs[j] / scale);
  }
  return out;
}

LocalFit fit_from_gram(const GramSystem& gram) {
  const std::size_t dim = gram.matrix.dim();
  LocalFit fit;
  fit.count = gram.count;
  fit.theta.assign(dim, 0.0);
  if (gram.count == 0) return fit;

  const double n_inv_sqrt = 1.0 / std::sqrt(static_cast<double>(gram.count));
  if (gram.norm == Normalization::ByCount) {
    fit.lambda_min = smallest_eigenvalue(gram.matrix);
    fit.omega_event = fit.lambda_min > n_inv_sqrt && gram.count >= 2;
    SymMatrix system = gram.matrix;
    if (fit.lambda_min <= n_inv_sqrt) {
      system.add_to_diagonal(n_inv_sqrt);
      fit.regularized = true;
    }
    fit.theta = solve_symmetric(system, gram.rhs);
  } else {
    fit.lambda_min = smallest_eigenvalue(gram.matrix);
    // same event as in ByCount scale: lambda(raw)/N = lambda(by-count)
    fit.omega_event = fit.lambda_min / gram.count > n_inv_sqrt && gram.count >= 2;
    fit.theta = solve_symmetric(gram.matrix, gram.rhs);
  }
  fit.estimate = fit.theta[0];
  return fit;
}

LocalFit fit_local(const SampleSet& data, const Window& w, int kappa, Normalization norm) {
  return fit_from_gram(build_gram(data, w, kappa, norm));
}

SymMatrix normalized_gram(const SampleSet& data, const Window& w, int kappa) {
  GramSystem gram = build_gram(data, w, kappa, Normalization::ByCount);
  if (gram.count == 0) throw DegenerateNormError("normalized_gram: empty window");
  SymMatrix out(kappa + 1);
  std::vector<double> norms(kappa + 1);
  for (int j = 0; j <= kappa; ++j) {
    norms[j] = std::sqrt(gram.matrix(j, j));
    if (norms[j] == 0.0)
      throw DegenerateNormError("normalized_gram: ||phi_j|| vanishes on the window");
  }
  for (int j = 0; j <= kappa; ++j) {
    out.set(j, j, 1.0);
    for (int l = j + 1; l <= kappa; ++l)
      out.set(j, l, gram.matrix(j, l) / (norms[j] * norms[l]));
  }
  return out;
}

} // namespace adalopo::locpoly
