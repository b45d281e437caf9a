// Brute-force reference implementations used to pin expected values in the
// test suite. Everything here is deliberately naive: direct loops, no
// rescaling tricks, no shared code with the library internals.
#ifndef FINVN_TESTS_ORACLES_HPP
#define FINVN_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "finvn/algebra.hpp"

namespace oracles {

using finvn::AlgebraElement;
using finvn::AlgebraPtr;
using finvn::complexd;
using finvn::Matrix;
using finvn::Vector;

// Plain shifted window mean A(n,k) = (1/(n+1)) sum_{i=k}^{k+n} u_i.
inline double window_mean(const std::vector<double>& u, std::int64_t n,
                          std::int64_t k) {
  double s = 0.0;
  for (std::int64_t i = k; i <= k + n; ++i)
    s += u[static_cast<std::size_t>(i)];
  return s / static_cast<double>(n + 1);
}

// Spread of window means over all admissible shifts.
inline std::pair<double, double> window_extremes(const std::vector<double>& u,
                                                 std::int64_t n) {
  double lo = 1e308, hi = -1e308;
  const std::int64_t N = static_cast<std::int64_t>(u.size());
  for (std::int64_t k = 0; k + n < N; ++k) {
    const double m = window_mean(u, n, k);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return {lo, hi};
}

// Direct Cesaro mean of the renormalized orbit T*^n X T^n / p(n)^2 over
// n = 0..N-1, materialized power by power. p given as plain values.
// Averages n = 1..N: the target object is shift-invariant (a Banach limit),
// so the n = 0 term is irrelevant and including it would add an O(1/N) bias.
inline AlgebraElement brute_orbit_cesaro(const AlgebraElement& t,
                                         const AlgebraElement& x,
                                         const std::vector<double>& p,
                                         std::int64_t N) {
  AlgebraElement acc = finvn::AlgebraElement::zero(t.algebra());
  AlgebraElement cur = x;
  for (std::int64_t n = 1; n <= N; ++n) {
    cur = t.adjoint() * cur * t;
    acc += complexd(1.0 / (p[static_cast<std::size_t>(n)] *
                           p[static_cast<std::size_t>(n)] *
                           static_cast<double>(N)),
                    0.0) *
           cur;
  }
  return acc;
}

// Exhaustive q' proxy over all subsets of {0..top} with size <= max_size:
// max over subsets of (min over tail shifts of the subset mean).
inline double brute_q_prime(const std::vector<double>& u, std::int64_t top,
                            int max_size) {
  const std::int64_t N = static_cast<std::int64_t>(u.size());
  double best = -1e308;
  std::vector<std::int64_t> subset;
  auto eval = [&](const std::vector<std::int64_t>& s) {
    const std::int64_t k_lo = N / 2;
    const std::int64_t k_hi = N - 1 - s.back();
    double worst = 1e308;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      double acc = 0.0;
      for (std::int64_t n : s) acc += u[static_cast<std::size_t>(n + k)];
      worst = std::min(worst, acc / static_cast<double>(s.size()));
    }
    return worst;
  };
  std::function<void(std::int64_t)> rec = [&](std::int64_t next) {
    if (!subset.empty()) best = std::max(best, eval(subset));
    if (static_cast<int>(subset.size()) == max_size) return;
    for (std::int64_t n = next; n <= top; ++n) {
      subset.push_back(n);
      rec(n + 1);
      subset.pop_back();
    }
  };
  rec(0);
  return best;
}

// Haar-ish random unitary via QR of a complex Gaussian matrix.
inline Matrix random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = complexd(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    complexd di = r(i, i);
    q.col(i) *= di / std::abs(di);
  }
  return q;
}

// Invertible S with condition number <= target, singular values spread
// geometrically from 1 to 1/target.
inline Matrix conditioned_matrix(int d, double cond, std::mt19937_64& rng) {
  Matrix u = random_unitary(d, rng);
  Matrix v = random_unitary(d, rng);
  Eigen::VectorXd sv(d);
  for (int i = 0; i < d; ++i)
    sv(i) = std::pow(cond, -static_cast<double>(i) /
                               std::max(1, d - 1));
  return u * sv.asDiagonal().toDenseMatrix().cast<complexd>() * v.adjoint();
}

// Panel operator: T = S (r diag(e^{i theta})) S^{-1}, eigenphases separated
// by at least `min_gap`.
struct PanelOperator {
  Matrix t;
  Matrix s;
  std::vector<double> phases;
  double radius;
};

inline PanelOperator panel_operator(int d, double radius, double cond,
                                    std::mt19937_64& rng,
                                    double min_gap = 0.05) {
  std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
  std::vector<double> phases;
  while (static_cast<int>(phases.size()) < d) {
    const double cand = uni(rng);
    bool ok = true;
    for (double ph : phases) {
      double diff = std::abs(cand - ph);
      diff = std::min(diff, 2.0 * M_PI - diff);
      if (diff < min_gap) ok = false;
    }
    // Keep phases clear of 0 as well so e^{i theta} != 1 is well separated.
    if (std::min(cand, 2.0 * M_PI - cand) < min_gap && cand != 0.0) ok = false;
    if (ok) phases.push_back(cand);
  }
  // Always include the trivial phase so the fixed space is nontrivial.
  phases[0] = 0.0;
  Matrix s = conditioned_matrix(d, cond, rng);
  Matrix diag = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    diag(i, i) = radius * std::exp(complexd(0.0, phases[i]));
  PanelOperator out;
  out.t = s * diag * s.inverse();
  out.s = s;
  out.phases = phases;
  out.radius = radius;
  return out;
}

// Phase-matching projection: zero out entries of Y (in the eigenbasis)
// whose eigenphase difference is nonzero.
inline Matrix phase_projection(const Matrix& y,
                               const std::vector<double>& phases,
                               double gap_tol = 1e-9) {
  const int d = static_cast<int>(y.rows());
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double diff = std::abs(phases[i] - phases[j]);
      diff = std::min(diff, 2.0 * M_PI - diff);
      if (diff <= gap_tol) out(i, j) = y(i, j);
    }
  return out;
}

}  // namespace oracles

#endif
