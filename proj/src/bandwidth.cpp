#include "adalopo/bandwidth.hpp"

#include <algorithm>
#include <cmath>

namespace adalopo::bandwidth {

using locpoly::SampleSet;
using locpoly::Window;

namespace {

std::vector<double> sorted_distances(const SampleSet& data, double x0) {
  std::vector<double> d(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) d[i] = std::abs(data.xs[i] - x0);
  std::sort(d.begin(), d.end());
  return d;
}

} // namespace

GridSpec build_grid(const SampleSet& data, double x0, GridKind kind, double a) {
  const std::size_t n = data.size();
  GridSpec grid{kind, a, {}};
  if (kind == GridKind::Arith) {
    if (a < 1.0) throw std::invalid_argument("build_grid: arithmetical grids need a >= 1");
  } else {
    if (!(a > 1.0)) throw std::invalid_argument("build_grid: geometrical grids need a > 1");
  }
  std::vector<double> h = sorted_distances(data, x0);
  if (kind == GridKind::Arith) {
    std::size_t imax = n >= 2 ? static_cast<std::size_t>((n - 2) / a) : 0;
    for (std::size_t i = 1; i <= imax; ++i) {
      std::size_t idx = 2 + static_cast<std::size_t>(std::floor(i * a)); // 1-based
      if (idx <= n) grid.values.push_back(h[idx - 1]);
    }
  } else {
    std::size_t imax = static_cast<std::size_t>(std::floor(std::log(static_cast<double>(n)) / std::log(a)));
    for (std::size_t i = 1; i <= imax; ++i) {
      std::size_t idx = static_cast<std::size_t>(std::floor(std::pow(a, static_cast<double>(i))));
      if (idx >= 1 && idx <= n) grid.values.push_back(h[idx - 1]);
    }
  }
  std::sort(grid.values.begin(), grid.values.end());
  grid.values.erase(std::unique(grid.values.begin(), grid.values.end()), grid.values.end());
  if (grid.values.empty()) throw EmptyGridError("build_grid: no grid index generated");
  return grid;
}

double threshold_symmetric(std::size_t n, std::size_t n_hp, std::size_t n_h, int kappa,
                           double p, GridKind kind, double a) {
  if (n_hp < 1) throw std::invalid_argument("threshold_symmetric: N_{n,h'} must be positive");
  if (n_h < 2) throw std::invalid_argument("threshold_symmetric: N_{n,h} must be at least 2");
  const double c_kappa = 1.0 + std::sqrt(kappa + 1.0);
  const double c_p = 8.0 * (1.0 + 2.0 * p);
  double first = c_kappa * std::sqrt(c_p * std::log(static_cast<double>(n_h)) / n_hp);
  double logn = std::log(static_cast<double>(n));
  if (kind == GridKind::Arith) {
    if (static_cast<double>(n_h) <= a)
      throw std::domain_error("threshold_symmetric: arithmetical grid needs N_{n,h} > a");
    return first + std::sqrt(logn / (static_cast<double>(n_h) - a));
  }
  return first + std::sqrt((1.0 + a) * logn / static_cast<double>(n_h));
}

SelectionResult select_bandwidth_symmetric(const SampleSet& data, double x0, int kappa,
                                           double p, const GridSpec& grid, double sigma) {
  if (grid.values.empty()) throw EmptyGridError("select_bandwidth_symmetric: empty grid");
  if (!(sigma > 0.0)) throw std::invalid_argument("select_bandwidth_symmetric: sigma must be positive");
  const std::size_t n = data.size();
  const std::size_t g = grid.values.size();

  std::vector<locpoly::GramSystem> grams(g);
  std::vector<locpoly::LocalFit> fits(g);
  for (std::size_t k = 0; k < g; ++k) {
    grams[k] = locpoly::build_gram(data, Window::symmetric(x0, grid.values[k]), kappa,
                                   locpoly::Normalization::ByCount);
    fits[k] = locpoly::fit_from_gram(grams[k]);
  }

  SelectionResult result;
  for (std::size_t ci = g; ci-- > 0;) {
    ++result.tested;
    bool pass = true;
    for (std::size_t si = 0; si < ci && pass; ++si) { // h' < h, ascending
      const auto& gp = grams[si];
      double thr_base = sigma * threshold_symmetric(n, gp.count, grams[ci].count, kappa, p,
                                                    grid.kind, grid.a);
      for (int j = 0; j <= kappa && pass; ++j) {
        double stat = 0.0;
        for (int l = 0; l <= kappa; ++l)
          stat += gp.matrix(j, l) * (fits[ci].theta[l] - fits[si].theta[l]);
        double thr = thr_base * std::sqrt(gp.matrix(j, j));
        if (std::abs(stat) > thr) {
          result.rejections.push_back({Window::symmetric(x0, grid.values[ci]),
                                       Window::symmetric(x0, grid.values[si]), j});
          pass = false;
        }
      }
    }
    if (pass) {
      result.window = Window::symmetric(x0, grid.values[ci]);
      result.fit = fits[ci];
      return result;
    }
  }
  // unreachable in practice: the smallest bandwidth passes vacuously
  result.no_admissible = true;
  result.window = Window::symmetric(x0, grid.values.front());
  result.fit = fits.front();
  return result;
}

IntervalGrid build_interval_grid(const SampleSet& data, double x, double a, std::size_t m) {
  const std::size_t n = data.size();
  if (!(a > 1.0)) throw std::invalid_argument("build_interval_grid: a must exceed 1");
  if (m < 1 || n < m) throw std::invalid_argument("build_interval_grid: need 1 <= m <= n");
  if (x < data.xs.front() - 1.0 || x > data.xs.back() + 1.0)
    throw OutOfRangeError("build_interval_grid: x is outside the data range margin");

  // seed = the m sample points nearest to x (a contiguous index range)
  std::size_t lo = std::lower_bound(data.xs.begin(), data.xs.end(), x) - data.xs.begin();
  std::size_t hi = lo; // [lo, hi) grows to size m
  while (hi - lo < m) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (x - data.xs[lo - 1] <= data.xs[hi] - x) {
      --lo;
    } else {
      ++hi;
    }
  }
  IntervalGrid grid;
  grid.seed_first = lo;
  grid.seed_last = hi;

  // endpoints at geometric index offsets from the seed edges, clamped
  auto collect = [&](bool leftward) {
    std::vector<double> vals;
    for (std::size_t i = 0;; ++i) {
      double off = std::floor(std::pow(a, static_cast<double>(i)));
      if (off > 2.0 * n) break;
      std::size_t step = static_cast<std::size_t>(off);
      bool clamped = false;
      std::size_t idx;
      if (leftward) {
        if (step - 1 >= lo) {
          idx = 0;
          clamped = true;
        } else {
          idx = lo - (step - 1); // 0-based of X_(jL+1-[a^i])
        }
      } else {
        if (hi - 1 + (step - 1) >= n) {
          idx = n - 1;
          clamped = true;
        } else {
          idx = hi - 1 + (step - 1); // 0-based of X_(jR-1+[a^i])
        }
      }
      vals.push_back(data.xs[idx]);
      if (clamped) break;
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  };
  grid.left = collect(true);
  grid.right = collect(false);

  struct Keyed {
    double lo, hi;
    std::ptrdiff_t count;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(grid.left.size() * grid.right.size());
  for (double l : grid.left) {
    auto first = std::lower_bound(data.xs.begin(), data.xs.end(), l);
    for (double r : grid.right) {
      auto last = std::upper_bound(first, data.xs.end(), r);
      keyed.push_back({l, r, last - first});
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& u, const Keyed& v) {
    if (u.count != v.count) return u.count > v.count;
    double lu = u.hi - u.lo, lv = v.hi - v.lo;
    if (lu != lv) return lu > lv;
    return u.lo < v.lo;
  });
  grid.intervals.reserve(keyed.size());
  for (const auto& k : keyed) grid.intervals.emplace_back(k.lo, k.hi);
  return grid;
}

namespace {

constexpr int kMaxDim = 11; // kappa <= 10

// In-place Cholesky solve on stack buffers; returns false on a nonpositive
// pivot (the robust solver takes over then).
bool small_cholesky_solve(const double* a, const double* b, int d, double* x) {
  double l[kMaxDim * kMaxDim];
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (int k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (s <= 0.0) return false;
        l[i * d + i] = std::sqrt(s);
      } else {
        l[i * d + j] = s / l[j * d + j];
      }
    }
  }
  double y[kMaxDim];
  for (int i = 0; i < d; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l[i * d + k] * y[k];
    y[i] = s / l[i * d + i];
  }
  for (int i = d; i-- > 0;) {
    double s = y[i];
    for (int k = i + 1; k < d; ++k) s -= l[k * d + i] * x[k];
    x[i] = s / l[i * d + i];
  }
  return true;
}

// Cached per-interval quantities for the asymmetric selector, in flat
// preallocated storage. Moments come from long-double prefix sums; the fit
// retained in the result is recomputed by direct window accumulation
// afterwards.
struct IntervalScratch {
  int d; // kappa + 1
  std::size_t n;
  const SampleSet& data;
  double x;
  std::vector<long double> px; // (2 kappa + 1) rows of length n+1
  std::vector<long double> py; // (kappa + 1) rows of length n+1
  std::vector<std::uint8_t> ready;
  std::vector<std::uint32_t> first_, count_;
  std::vector<double> theta_;  // slot * d
  std::vector<double> hmat_;   // slot * d * d
  std::vector<std::uint16_t> row_mask_;

  IntervalScratch(const SampleSet& dat, double x_, int kappa, std::size_t slots)
      : d(kappa + 1),
        n(dat.size()),
        data(dat),
        x(x_),
        px((2 * kappa + 1) * (n + 1), 0.0L),
        py((kappa + 1) * (n + 1), 0.0L),
        ready(slots, 0),
        first_(slots, 0),
        count_(slots, 0),
        theta_(slots * d, 0.0),
        hmat_(slots * d * d, 0.0),
        row_mask_(slots, 0) {
    for (std::size_t i = 0; i < n; ++i) {
      long double d0 = static_cast<long double>(data.xs[i]) - x;
      long double p = 1.0L;
      for (int q = 0; q <= 2 * (d - 1); ++q) {
        px[q * (n + 1) + i + 1] = px[q * (n + 1) + i] + p;
        if (q < d) py[q * (n + 1) + i + 1] = py[q * (n + 1) + i] + data.ys[i] * p;
        p *= d0;
      }
    }
  }

  void build(std::size_t slot, double lo, double hi) {
    if (ready[slot]) return;
    std::size_t first = std::lower_bound(data.xs.begin(), data.xs.end(), lo) - data.xs.begin();
    std::size_t last = std::upper_bound(data.xs.begin() + first, data.xs.end(), hi) -
                       data.xs.begin();
    first_[slot] = static_cast<std::uint32_t>(first);
    count_[slot] = static_cast<std::uint32_t>(last - first);
    double mom[2 * kMaxDim - 1];
    double a[kMaxDim * kMaxDim];
    double rhs[kMaxDim];
    for (int q = 0; q <= 2 * (d - 1); ++q)
      mom[q] = static_cast<double>(px[q * (n + 1) + last] - px[q * (n + 1) + first]);
    for (int j = 0; j < d; ++j) {
      for (int l = 0; l < d; ++l) a[j * d + l] = mom[j + l];
      rhs[j] = static_cast<double>(py[j * (n + 1) + last] - py[j * (n + 1) + first]);
    }
    double* theta = &theta_[slot * d];
    if (!small_cholesky_solve(a, rhs, d, theta)) {
      SymMatrix gram(d);
      std::vector<double> b(d);
      for (int j = 0; j < d; ++j) {
        for (int l = j; l < d; ++l) gram.set(j, l, mom[j + l]);
        b[j] = rhs[j];
      }
      auto solved = solve_symmetric(gram, b); // throws when truly singular
      std::copy(solved.begin(), solved.end(), theta);
    }
    double* hm = &hmat_[slot * d * d];
    std::uint16_t mask = 0;
    for (int j = 0; j < d; ++j) {
      double norm = std::sqrt(mom[2 * j]);
      if (norm == 0.0) continue; // all points of the window sit at x: drop row
      mask |= static_cast<std::uint16_t>(1u << j);
      for (int l = 0; l < d; ++l) hm[j * d + l] = mom[j + l] / norm;
    }
    row_mask_[slot] = mask;
    ready[slot] = 1;
  }
};

} // namespace

SelectionResult select_interval(const SampleSet& data, double x, int kappa, double a,
                                std::size_t m, double sigma_hat,
                                const IntervalSelectorOptions& opts) {
  if (kappa < 0 || kappa > 10) throw std::invalid_argument("select_interval: kappa must be in [0,10]");
  if (m < static_cast<std::size_t>(kappa) + 1)
    throw std::invalid_argument("select_interval: m must be at least kappa+1");
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("select_interval: sigma_hat must be positive");

  IntervalGrid grid = build_interval_grid(data, x, a, m);
  const std::size_t n = data.size();
  const double logn = std::log(static_cast<double>(n));
  const double c_kappa = 1.0 + std::sqrt(kappa + 1.0);
  const int d = kappa + 1;

  const std::size_t nl = grid.left.size(), nr = grid.right.size();
  auto left_index = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(grid.left.begin(), grid.left.end(), v) -
                                    grid.left.begin());
  };
  auto right_index = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(grid.right.begin(), grid.right.end(), v) -
                                    grid.right.begin());
  };
  IntervalScratch scratch(data, x, kappa, nl * nr);

  SelectionResult result;
  for (const auto& cand : grid.intervals) {
    ++result.tested;
    const std::size_t li = left_index(cand.first), ri = right_index(cand.second);
    const std::size_t ci = li * nr + ri;
    scratch.build(ci, cand.first, cand.second);
    const double n_i = static_cast<double>(scratch.count_[ci]);
    const double* theta_i = &scratch.theta_[ci * d];
    const double noise = c_kappa * std::sqrt(std::log(n_i));
    // contained sub-intervals have lj >= li and rj <= ri; the scan starts at
    // the innermost (seed-containing) interval, where a bias violation shows
    // up first
    bool pass = true;
    locpoly::Window violator{};
    int violated_coord = 0;
    for (std::size_t lj = nl; pass && lj-- > li;) {
      for (std::size_t rj = 0; pass && rj <= ri; ++rj) {
        if (lj == li && rj == ri) continue;
        const std::size_t sj = lj * nr + rj;
        scratch.build(sj, grid.left[lj], grid.right[rj]);
        const double n_j = static_cast<double>(scratch.count_[sj]);
        double grid_term = std::sqrt((1.0 + a) * (n_j / n_i) * logn);
        double thr = opts.paper_literal_threshold ? sigma_hat * noise + grid_term
                                                  : sigma_hat * (noise + grid_term);
        const double* theta_j = &scratch.theta_[sj * d];
        const double* hm = &scratch.hmat_[sj * d * d];
        const std::uint16_t mask = scratch.row_mask_[sj];
        for (int j = 0; j < d && pass; ++j) {
          if (!(mask & (1u << j))) continue;
          double stat = 0.0;
          for (int l = 0; l < d; ++l) stat += hm[j * d + l] * (theta_i[l] - theta_j[l]);
          if (std::abs(stat) > thr) {
            pass = false;
            violator = Window::interval(grid.left[lj], grid.right[rj], x);
            violated_coord = j;
          }
        }
      }
    }
    if (pass) {
      result.window = Window::interval(cand.first, cand.second, x);
      result.fit = locpoly::fit_local(data, result.window, kappa, locpoly::Normalization::Raw);
      return result;
    }
    result.rejections.push_back(
        {Window::interval(cand.first, cand.second, x), violator, violated_coord});
  }
  // unreachable in practice: minimal intervals pass vacuously
  result.no_admissible = true;
  const auto& smallest = grid.intervals.back();
  result.window = Window::interval(smallest.first, smallest.second, x);
  result.fit = locpoly::fit_local(data, result.window, kappa, locpoly::Normalization::Raw);
  return result;
}

IdealBandwidth ideal_bandwidth(const SampleSet& data, double x0,
                               const rvdesign::ModulusSpec& modulus, double sigma) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("ideal_bandwidth: need n >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("ideal_bandwidth: sigma must be positive");
  const double logn = std::log(static_cast<double>(n));
  const double upper = std::min(1.0, modulus.monotone_upper());
  if (modulus(upper) < sigma * std::sqrt(logn / static_cast<double>(n)))
    throw UndefinedError("ideal_bandwidth: omega(1) < sigma sqrt(log(n)/n)");

  std::vector<double> dist = sorted_distances(data, x0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && dist[j] == dist[i]) ++j;
    count = j; // N_{n,h} at h = dist[i]
    double h = dist[i];
    double rhs = sigma * std::sqrt(logn / static_cast<double>(count));
    if (h > 0.0 && modulus(h) >= rhs) return {h, rhs, count};
    i = j;
  }
  // crossing lies beyond the largest distance, where N = n is constant
  double target = sigma * std::sqrt(logn / static_cast<double>(n));
  double lo = dist.back(), hi = upper;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    (modulus(mid) >= target ? hi : lo) = mid;
  }
  return {hi, target, n};
}

double estimate_sigma(const locpoly::SampleSet& data) {
  const std::size_t n = data.size();
  if (n < 2) throw std::domain_error("estimate_sigma: need at least two observations");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double diff = data.ys[i + 1] - data.ys[i];
    acc += diff * diff;
  }
  return std::sqrt(acc / (2.0 * static_cast<double>(n - 1)));
}

} // namespace adalopo::bandwidth
