#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const Fn& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

} // namespace

double adaptive_simpson(const Fn& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson(a, b, fa, fm, fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

double tanh_sinh(const Fn& f, double a, double b) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const double pi_half = 1.5707963267948966;
  double prev = 0.0;
  for (int level = 3; level <= 11; ++level) {
    double hstep = 4.0 / std::pow(2.0, level);
    double acc = 0.0;
    for (double t = -4.0 + hstep * 0.5; t < 4.0; t += hstep) {
      double sh = pi_half * std::sinh(t);
      double x = mid + half * std::tanh(sh);
      double w = half * pi_half * std::cosh(t) / (std::cosh(sh) * std::cosh(sh));
      if (x <= a || x >= b) continue;
      double v = f(x);
      if (std::isfinite(v)) acc += w * v;
    }
    acc *= hstep;
    if (level > 4 && std::abs(acc - prev) <= 1e-12 * (1.0 + std::abs(acc))) return acc;
    prev = acc;
  }
  return prev;
}

namespace {

// Eigenvalue count below lambda: negative pivots of LDL^T of A - lambda I.
int count_below(const std::vector<std::vector<double>>& a, double lambda) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> m = a;
  for (std::size_t i = 0; i < n; ++i) m[i][i] -= lambda;
  int negatives = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double piv = m[k][k];
    if (piv == 0.0) piv = -1e-300; // count a null pivot as below
    if (piv < 0.0) ++negatives;
    for (std::size_t i = k + 1; i < n; ++i) {
      double fctr = m[i][k] / piv;
      for (std::size_t j = k; j < n; ++j) m[i][j] -= fctr * m[k][j];
    }
  }
  return negatives;
}

} // namespace

double smallest_eigenvalue(const std::vector<std::vector<double>>& a, double tol) {
  const std::size_t n = a.size();
  // closed forms keep boundary ties (ridge indicator at equality) exact
  if (n == 1) return a[0][0];
  if (n == 2) {
    double mid = 0.5 * (a[0][0] + a[1][1]);
    double rad = std::sqrt(0.25 * (a[0][0] - a[1][1]) * (a[0][0] - a[1][1]) + a[0][1] * a[0][1]);
    return mid - rad;
  }
  double lo = a[0][0], hi = a[0][0];
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(a[i][j]);
    lo = std::min(lo, a[i][i] - radius);
    hi = std::max(hi, a[i][i] + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > tol * (1.0 + std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    (count_below(a, mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double determinant(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  double det = 0.0, sign = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> minor(n - 1, std::vector<double>(n - 1));
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t mj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == c) continue;
        minor[i - 1][mj++] = a[i][j];
      }
    }
    det += sign * a[0][c] * determinant(minor);
    sign = -sign;
  }
  return det;
}

std::vector<double> cramer_solve(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b) {
  const std::size_t n = a.size();
  double det = determinant(a);
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (std::abs(det) <= 1e-280 || (scale > 0.0 && std::abs(det) < 1e-120 * std::pow(scale, n)))
    throw std::runtime_error("cramer_solve: singular");
  std::vector<double> x(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> m = a;
    for (std::size_t i = 0; i < n; ++i) m[i][c] = b[i];
    x[c] = determinant(m) / det;
  }
  return x;
}

double ks_distance(const std::vector<double>& sorted_sample, const Fn& cdf) {
  const std::size_t n = sorted_sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = cdf(sorted_sample[i]);
    d = std::max(d, std::abs(v - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(v - static_cast<double>(i) / n));
  }
  return d;
}

namespace {

struct RawFit {
  std::vector<double> theta;
  std::size_t count = 0;
};

// Direct-summation moments over a point subset; every power via std::pow.
std::vector<std::vector<double>> direct_matrix(const std::vector<double>& pts, double center,
                                               int kappa, bool by_count) {
  std::vector<std::vector<double>> m(kappa + 1, std::vector<double>(kappa + 1, 0.0));
  for (int j = 0; j <= kappa; ++j)
    for (int l = 0; l <= kappa; ++l) {
      double acc = 0.0;
      for (double p : pts) acc += std::pow(p - center, j + l);
      m[j][l] = by_count && !pts.empty() ? acc / pts.size() : acc;
    }
  return m;
}

std::vector<double> direct_rhs(const std::vector<double>& pts, const std::vector<double>& ys,
                               double center, int kappa, bool by_count) {
  std::vector<double> r(kappa + 1, 0.0);
  for (int j = 0; j <= kappa; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) acc += ys[i] * std::pow(pts[i] - center, j);
    r[j] = by_count && !pts.empty() ? acc / pts.size() : acc;
  }
  return r;
}

} // namespace

SymmetricSelection select_symmetric(const std::vector<double>& xs, const std::vector<double>& ys,
                                    double x0, int kappa, double p, bool arith_grid, double a,
                                    double sigma) {
  const std::size_t n = xs.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(xs[i] - x0);
  std::sort(dist.begin(), dist.end());

  std::vector<double> grid;
  if (arith_grid) {
    for (std::size_t i = 1; i <= static_cast<std::size_t>((n - 2) / a); ++i) {
      std::size_t idx = 2 + static_cast<std::size_t>(std::floor(i * a));
      if (idx <= n) grid.push_back(dist[idx - 1]);
    }
  } else {
    std::size_t imax = static_cast<std::size_t>(std::floor(std::log((double)n) / std::log(a)));
    for (std::size_t i = 1; i <= imax; ++i) {
      std::size_t idx = static_cast<std::size_t>(std::floor(std::pow(a, (double)i)));
      if (idx >= 1 && idx <= n) grid.push_back(dist[idx - 1]);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw std::runtime_error("oracle: empty grid");

  // fits and matrices per grid value, ridge applied literally
  std::vector<RawFit> fits(grid.size());
  std::vector<std::vector<std::vector<double>>> mats(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> wx, wy;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(xs[i] - x0) <= grid[g]) {
        wx.push_back(xs[i]);
        wy.push_back(ys[i]);
      }
    fits[g].count = wx.size();
    if (wx.empty()) {
      fits[g].theta.assign(kappa + 1, 0.0);
      mats[g] = direct_matrix(wx, x0, kappa, true);
      continue;
    }
    auto mat = direct_matrix(wx, x0, kappa, true);
    mats[g] = mat;
    double lam = smallest_eigenvalue(mat);
    double ridge = 1.0 / std::sqrt(static_cast<double>(wx.size()));
    auto solve_mat = mat;
    if (lam <= ridge)
      for (int j = 0; j <= kappa; ++j) solve_mat[j][j] += ridge;
    fits[g].theta = cramer_solve(solve_mat, direct_rhs(wx, wy, x0, kappa, true));
  }

  const double c_kappa = 1.0 + std::sqrt(kappa + 1.0);
  const double c_p = 8.0 * (1.0 + 2.0 * p);
  SymmetricSelection out;
  for (std::size_t ci = grid.size(); ci-- > 0;) {
    bool pass = true;
    for (std::size_t si = 0; si < ci && pass; ++si) {
      double n_h = static_cast<double>(fits[ci].count);
      double n_hp = static_cast<double>(fits[si].count);
      double second = arith_grid ? std::sqrt(std::log((double)n) / (n_h - a))
                                 : std::sqrt((1.0 + a) * std::log((double)n) / n_h);
      double t = c_kappa * std::sqrt(c_p * std::log(n_h) / n_hp) + second;
      for (int j = 0; j <= kappa && pass; ++j) {
        double stat = 0.0;
        for (int l = 0; l <= kappa; ++l)
          stat += mats[si][j][l] * (fits[ci].theta[l] - fits[si].theta[l]);
        double thr = sigma * std::sqrt(mats[si][j][j]) * t;
        if (std::abs(stat) > thr) pass = false;
      }
    }
    if (pass) {
      out.h = grid[ci];
      out.theta = fits[ci].theta;
      out.estimate = fits[ci].theta[0];
      return out;
    }
  }
  out.no_admissible = true;
  out.h = grid.front();
  out.theta = fits.front().theta;
  out.estimate = fits.front().theta[0];
  return out;
}

IntervalSelection select_interval(const std::vector<double>& xs, const std::vector<double>& ys,
                                  double x, int kappa, double a, std::size_t m, double sigma_hat,
                                  bool paper_literal_threshold) {
  const std::size_t n = xs.size();
  // seed: the m nearest sample points, ties to the left
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
    double du = std::abs(xs[u] - x), dv = std::abs(xs[v] - x);
    if (du != dv) return du < dv;
    return u < v;
  });
  std::size_t jl = n, jr = 0;
  for (std::size_t k = 0; k < m; ++k) {
    jl = std::min(jl, order[k]);
    jr = std::max(jr, order[k]);
  }

  auto collect = [&](bool leftward) {
    std::vector<double> vals;
    for (std::size_t i = 0;; ++i) {
      double off = std::floor(std::pow(a, (double)i));
      if (off > 2.0 * n) break;
      long long step = static_cast<long long>(off);
      long long idx = leftward ? static_cast<long long>(jl) - (step - 1)
                               : static_cast<long long>(jr) + (step - 1);
      bool clamp = idx < 0 || idx >= static_cast<long long>(n);
      if (clamp) idx = leftward ? 0 : static_cast<long long>(n) - 1;
      vals.push_back(xs[static_cast<std::size_t>(idx)]);
      if (clamp) break;
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  };
  std::vector<double> left = collect(true), right = collect(false);

  struct Cand {
    double lo, hi;
    std::size_t count;
  };
  std::vector<Cand> cands;
  for (double lo : left)
    for (double hi : right) {
      std::size_t cnt = 0;
      for (double xi : xs)
        if (xi >= lo && xi <= hi) ++cnt;
      cands.push_back({lo, hi, cnt});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& u, const Cand& v) {
    if (u.count != v.count) return u.count > v.count;
    double lu = u.hi - u.lo, lv = v.hi - v.lo;
    if (lu != lv) return lu > lv;
    return u.lo < v.lo;
  });

  auto fit_of = [&](const Cand& c) {
    std::vector<double> wx, wy;
    for (std::size_t i = 0; i < n; ++i)
      if (xs[i] >= c.lo && xs[i] <= c.hi) {
        wx.push_back(xs[i]);
        wy.push_back(ys[i]);
      }
    return cramer_solve(direct_matrix(wx, x, kappa, false), direct_rhs(wx, wy, x, kappa, false));
  };

  const double c_kappa = 1.0 + std::sqrt(kappa + 1.0);
  const double logn = std::log(static_cast<double>(n));
  IntervalSelection out;
  for (const Cand& cand : cands) {
    auto theta_i = fit_of(cand);
    bool pass = true;
    for (const Cand& sub : cands) {
      if (!(sub.lo >= cand.lo && sub.hi <= cand.hi)) continue;
      if (sub.lo == cand.lo && sub.hi == cand.hi) continue;
      auto theta_j = fit_of(sub);
      std::vector<double> wx;
      for (double xi : xs)
        if (xi >= sub.lo && xi <= sub.hi) wx.push_back(xi);
      double noise = c_kappa * std::sqrt(std::log((double)cand.count));
      double grid_term =
          std::sqrt((1.0 + a) * ((double)sub.count / (double)cand.count) * logn);
      double thr = paper_literal_threshold ? sigma_hat * noise + grid_term
                                           : sigma_hat * (noise + grid_term);
      for (int j = 0; j <= kappa && pass; ++j) {
        double norm2 = 0.0;
        for (double xi : wx) norm2 += std::pow(xi - x, 2 * j);
        if (norm2 == 0.0) continue; // degenerate coordinate dropped
        double stat = 0.0;
        for (int l = 0; l <= kappa; ++l) {
          double entry = 0.0;
          for (double xi : wx) entry += std::pow(xi - x, j + l);
          stat += entry / std::sqrt(norm2) * (theta_i[l] - theta_j[l]);
        }
        if (std::abs(stat) > thr) pass = false;
      }
      if (!pass) break;
    }
    if (pass) {
      out.lo = cand.lo;
      out.hi = cand.hi;
      out.theta = theta_i;
      out.estimate = theta_i[0];
      return out;
    }
  }
  out.no_admissible = true;
  const Cand& last = cands.back();
  out.lo = last.lo;
  out.hi = last.hi;
  out.theta = fit_of(last);
  out.estimate = out.theta[0];
  return out;
}

} // namespace oracles
