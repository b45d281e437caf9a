#include "finvn/limits.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace finvn {

namespace {

double frob(const Matrix& m) { return m.norm(); }

AlgebraElement random_element(const AlgebraPtr& alg, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(alg->elem_dim());
  for (int i = 0; i < v.size(); ++i) v(i) = complexd(gauss(rng), gauss(rng));
  v /= v.norm();
  return AlgebraElement::from_coords(alg, v);
}

// Random polynomial in T of degree <= 3, operator norm clamped to <= 1.
AlgebraElement random_poly(const AlgebraElement& t, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  AlgebraElement acc = AlgebraElement::zero(t.algebra());
  AlgebraElement pw = AlgebraElement::identity(t.algebra());
  for (int k = 0; k <= 3; ++k) {
    acc += complexd(gauss(rng), gauss(rng)) * pw;
    pw = pw * t;
  }
  const double n = op_norm(acc);
  if (n > 1.0) acc *= complexd(1.0 / n, 0.0);
  return acc;
}

double projection_score(const Matrix& s, const Matrix& e,
                        ProjectionStats* st) {
  const double ri = frob(e * e - e);
  const double rint = std::max(frob(s * e - e), frob(e * s - e));
  const complexd tr = e.trace();
  const double rank = std::round(tr.real());
  const double trd = std::abs(tr - complexd(rank, 0.0));
  if (st) {
    st->residual_idempotent = ri;
    st->residual_intertwine = rint;
    st->trace_defect = trd;
    st->rank = static_cast<int>(rank);
  }
  return ri + rint + trd;
}

}  // namespace

//============================================================================
// Fixed-space projection
//============================================================================

Matrix fixed_space_projection(const Matrix& s, ProjectionStats* stats,
                              double fix_window) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n || n == 0)
    fail(errc::shape_mismatch, "fixed_space_projection needs a square matrix");

  // Path 1: Cesaro doubling, then repeated squaring. Every intermediate is a
  // convex combination of powers of s, so the iteration is stable whenever
  // the powers of s are bounded.
  Matrix a = Matrix::Identity(n, n);
  Matrix p = s;
  for (int j = 0; j < 10; ++j) {  // a = Cesaro mean of s^0 .. s^1023
    a = 0.5 * (a + p * a);
    p = p * p;
    if (!a.allFinite() || !p.allFinite())
      fail(errc::no_convergence, "powers blow up; input is not power bounded");
  }
  // Squaring: if a = E + R with ER = RE = 0 then a^2 = E + R^2, so the
  // distance to the projection squares each step. Small eigenvalue drift
  // (fixed eigenvalues a rounding error above 1) eventually inflates the
  // iterates, so stop on a delta plateau and keep the best iterate seen.
  Matrix prev = a;
  Matrix best = a;
  double best_delta = std::numeric_limits<double>::infinity();
  int worse_streak = 0;
  int iters = 0;
  for (int k = 1; k <= 60; ++k) {
    a = a * a;
    ++iters;
    if (!a.allFinite()) break;
    const double delta = frob(a - prev);
    prev = a;
    if (delta <= 1e-14 * (1.0 + frob(a))) {
      best = a;
      best_delta = delta;
      break;
    }
    if (delta < best_delta) {
      best_delta = delta;
      best = a;
      worse_streak = 0;
    } else if (++worse_streak >= 2) {
      break;
    }
  }
  Matrix e_ces = best;
  ProjectionStats st_ces;
  double score_ces = projection_score(s, e_ces, &st_ces);

  // Path 2: eigendecomposition, when s is numerically diagonalizable.
  int eig_count = -1;
  Matrix e_eig;
  double score_eig = std::numeric_limits<double>::infinity();
  ProjectionStats st_eig;
  Eigen::ComplexEigenSolver<Matrix> ces(s, true);
  if (ces.info() == Eigen::Success) {
    // The averaged powers only converge when the powers stay bounded, which
    // needs the spectrum inside the closed unit disk. Schur-based eigenvalues
    // are reliable even for defective inputs, so reject early.
    const double sr = ces.eigenvalues().cwiseAbs().maxCoeff();
    if (sr > 1.0 + 1e-6 * std::max(1.0, sr))
      fail(errc::no_convergence,
           "powers of the input are unbounded (spectral radius " +
               std::to_string(sr) + ")");
    eig_count = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(ces.eigenvalues()(i) - complexd(1.0, 0.0)) <= fix_window)
        ++eig_count;
    Eigen::PartialPivLU<Matrix> lu(ces.eigenvectors());
    if (lu.rcond() > 1e-12) {
      Matrix w = lu.solve(Matrix::Identity(n, n));
      e_eig = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        if (std::abs(ces.eigenvalues()(i) - complexd(1.0, 0.0)) <= fix_window)
          e_eig += ces.eigenvectors().col(i) * w.row(i);
      score_eig = projection_score(s, e_eig, &st_eig);
    }
  }

  const bool use_eig = score_eig < score_ces;
  Matrix e = use_eig ? e_eig : e_ces;
  ProjectionStats st = use_eig ? st_eig : st_ces;
  double score = use_eig ? score_eig : score_ces;

  // Newton polish passes (quadratic idempotent refinement), kept only while
  // they lower the combined residual score.
  for (int round = 0; round < 4; ++round) {
    Matrix e2 = e * e;
    Matrix polished = 3.0 * e2 - 2.0 * (e2 * e);
    ProjectionStats st_pol;
    const double score_pol = projection_score(s, polished, &st_pol);
    if (score_pol >= score) break;
    e = polished;
    st = st_pol;
    score = score_pol;
  }

  if (!(score <= 1e-2 * (1.0 + frob(e))))
    fail(errc::no_convergence,
         "no stable fixed-space projection found (residual " +
             std::to_string(score) + ")");

  st.eig_count = eig_count;
  st.iterations = iters;
  st.used_eigen_path = use_eig;
  st.final_delta = best_delta;
  if (stats) *stats = st;
  return e;
}

//============================================================================
// Orbit norms
//============================================================================

namespace {

double block_op_norm(const Matrix& m, Vector* warm) {
  if (m.rows() <= 48 || !warm) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
  // Warm-started power iteration on m* m for large blocks.
  Vector v = *warm;
  if (v.size() != m.cols() || v.norm() == 0.0) {
    v = Vector::Ones(m.cols());
    v /= v.norm();
  }
  double est = 0.0;
  for (int it = 0; it < 12; ++it) {
    Vector w = m.adjoint() * (m * v);
    const double nn = w.norm();
    if (nn == 0.0) return 0.0;
    v = w / nn;
    est = std::sqrt(nn);
  }
  *warm = v;
  return est;
}

}  // namespace

std::vector<double> log_orbit_norms(const AlgebraElement& t,
                                    std::int64_t horizon) {
  if (horizon < 1) fail(errc::bad_config, "horizon must be >= 1");
  const AlgebraPtr& alg = t.algebra();
  std::vector<double> out(static_cast<std::size_t>(horizon) + 1, 0.0);
  std::vector<Matrix> cur;
  std::vector<Vector> warm(alg->block_count());
  for (int b = 0; b < alg->block_count(); ++b) cur.push_back(t.block(b));
  double log_scale = 0.0;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    double nn = 0.0;
    for (int b = 0; b < alg->block_count(); ++b)
      nn = std::max(nn, block_op_norm(cur[b], &warm[b]));
    if (nn <= 0.0) {
      for (std::int64_t m = n; m <= horizon; ++m)
        out[static_cast<std::size_t>(m)] =
            -std::numeric_limits<double>::infinity();
      return out;
    }
    out[static_cast<std::size_t>(n)] = log_scale + std::log(nn);
    for (int b = 0; b < alg->block_count(); ++b) {
      cur[b] /= nn;
      if (n < horizon) cur[b] = t.block(b) * cur[b];
    }
    log_scale += std::log(nn);
  }
  return out;
}

//============================================================================
// Shared gate + certificate helpers
//============================================================================

namespace {

struct CompatResult {
  double value = 0.0;
  bool via_qprime = false;
};

CompatResult compatibility_value(const std::vector<double>& log_sizes,
                                 const Gauge& p, const LimitOptions& opts) {
  const std::int64_t N = static_cast<std::int64_t>(log_sizes.size()) - 1;
  std::vector<double> u(static_cast<std::size_t>(N) + 1);
  for (std::int64_t n = 0; n <= N; ++n) {
    const double lr = log_sizes[static_cast<std::size_t>(n)] - p.log_at(n);
    u[static_cast<std::size_t>(n)] = lr < -700.0 ? 0.0 : std::exp(lr);
  }
  CompatResult res;
  AlmostLimitResult al = almost_limit(u, std::max(1e-3, opts.tol));
  if (al.converged) {
    res.value = al.estimate;
  } else {
    res.value = q_prime(u).value;
    res.via_qprime = true;
  }
  return res;
}

// Window certificate over an exact renormalized recurrence: `advance`
// produces the coordinates of the (n+1)-th term from the n-th element, the
// comparison target is E applied to the probe.
WindowCertificate window_certificate(
    const AlgebraPtr& alg, const Matrix& e_action, std::int64_t horizon,
    const LimitOptions& opts,
    const std::function<Vector(const Vector&, std::int64_t)>& advance,
    const ProjectionStats& st) {
  WindowCertificate cert;
  const std::int64_t N = horizon;
  const std::int64_t w3 = N / 4, w2 = N / 8, w1 = N / 16;
  const int dim = alg->elem_dim();
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  std::vector<Vector> prefix(static_cast<std::size_t>(N) + 2);
  for (int probe = 0; probe < std::max(1, opts.probes); ++probe) {
    Vector x = random_element(alg, rng).coords();
    Vector target = e_action * x;
    prefix[0] = Vector::Zero(dim);
    Vector cur = x;
    for (std::int64_t n = 0; n <= N; ++n) {
      prefix[static_cast<std::size_t>(n) + 1] =
          prefix[static_cast<std::size_t>(n)] + cur;
      if (n < N) cur = advance(cur, n);
    }
    auto window_defect = [&](std::int64_t w) {
      double worst = 0.0;
      for (std::int64_t k = 0; k + w <= N; ++k) {
        Vector mean = (prefix[static_cast<std::size_t>(k + w) + 1] -
                       prefix[static_cast<std::size_t>(k)]) /
                      static_cast<double>(w + 1);
        worst = std::max(worst, (mean - target).norm());
      }
      return worst;
    };
    d1 = std::max(d1, window_defect(w1));
    d2 = std::max(d2, window_defect(w2));
    d3 = std::max(d3, window_defect(w3));
  }
  cert.defect = d3;
  cert.window = w3;
  cert.trend = d3 / std::max(d1, 1e-300);
  const double s = 1.0 + e_action.norm();
  const bool residuals_ok = st.residual_idempotent <= 1e-8 * s &&
                            st.residual_intertwine <= 1e-8 * s &&
                            st.trace_defect <= 1e-6;
  const bool rank_ok = st.eig_count < 0 || st.rank == st.eig_count;
  const bool decaying =
      d3 <= opts.tol || d3 <= 0.8 * d1 || d3 <= 0.8 * d2;
  cert.certified = residuals_ok && rank_ok && decaying;
  return cert;
}

void require_regular(const GaugeAnalysis& ga, const LimitOptions& opts) {
  if (ga.regular || opts.allow_nonregular) return;
  std::ostringstream os;
  os << "gauge " << "is not regular: c^n/p(n) ";
  if (ga.gamma_converged)
    os << "almost-converges to " << ga.gamma << " instead of 1";
  else
    os << "is not almost convergent";
  fail(errc::not_regular_gauge, os.str());
}

void require_dominated(const DominationReport& dom) {
  if (dom.dominated) return;
  std::ostringstream os;
  os << "orbit is not dominated by the gauge: max ratio " << dom.max_ratio
     << " at n = " << dom.worst_n << ", tail/head growth "
     << dom.tail_head_ratio;
  fail(errc::not_dominated, os.str());
}

void require_compatible(const CompatResult& compat, const LimitOptions& opts) {
  if (compat.value > opts.compat_tol) return;
  std::ostringstream os;
  os << "gauge strictly dominates the orbit: ratio "
     << (compat.via_qprime ? "subset bound " : "almost limit ") << compat.value
     << " <= " << opts.compat_tol;
  fail(errc::not_compatible, os.str());
}

}  // namespace

//============================================================================
// Orbit limit
//============================================================================

OrbitLimit orbit_limit(const AlgebraElement& t, const Gauge& p,
                       const LimitOptions& opts) {
  const AlgebraPtr& alg = t.algebra();
  const std::int64_t N = std::min(opts.horizon, p.horizon());
  if (N < 64) fail(errc::horizon_too_short, "orbit limit needs horizon >= 64");

  OrbitLimit res{SuperOperator::zero_map(alg), 0.0, 0.0, {}, {}, 0.0, false,
                 {}, {}, false};
  // Gauge classification is cheap scalar work, and its tolerance class is
  // calibrated for windows of length >= 1024; analyze at 4096 when the gauge
  // reaches that far even if the matrix iteration horizon is shorter.
  const std::int64_t gauge_n =
      std::min(std::max<std::int64_t>(opts.horizon, 4096), p.horizon());
  res.gauge = analyze_gauge(p, gauge_n, opts.gauge_tol);
  require_regular(res.gauge, opts);

  const std::vector<double> logorb = log_orbit_norms(t, N);
  res.domination = check_domination(logorb, p, opts.strict_domination);
  require_dominated(res.domination);

  const CompatResult compat = compatibility_value(logorb, p, opts);
  res.compat_value = compat.value;
  res.compat_via_qprime = compat.via_qprime;
  require_compatible(compat, opts);

  const double c = res.gauge.growth;
  res.growth = c;
  res.rho = res.gauge.rho_converged ? res.gauge.rho
                                    : (res.gauge.regular ? 1.0 : 0.0);

  const Matrix step = SuperOperator::sandwich(t.adjoint(), t).action();
  auto gauge_factor2 = [&](std::int64_t n) {
    return std::exp(2.0 * (p.log_at(n) - p.log_at(n + 1)));
  };

  if (!res.gauge.regular) {
    // Diagnostics-only path: a plain window mean of the exact recurrence.
    if (alg->elem_dim() > 128)
      fail(errc::resource_limit,
           "non-regular window evaluation limited to coordinate dimension 128");
    Matrix m = Matrix::Identity(alg->elem_dim(), alg->elem_dim());
    Matrix acc = Matrix::Zero(alg->elem_dim(), alg->elem_dim());
    std::int64_t count = 0;
    for (std::int64_t n = 0; n <= N / 2 + N / 4; ++n) {
      if (n >= N / 2) {
        acc += m;
        ++count;
      }
      m = gauge_factor2(n) * (step * m);
    }
    acc /= static_cast<double>(count);
    res.value = SuperOperator(alg, acc);
    res.diagnostics_only = true;
    projection_score(step / (c * c), acc, &res.projection);
    res.projection.eig_count = -1;
  } else {
    Matrix e = fixed_space_projection(step / (c * c), &res.projection);
    res.value = SuperOperator(alg, e);
  }

  auto advance = [&](const Vector& v, std::int64_t n) {
    AlgebraElement y = AlgebraElement::from_coords(alg, v);
    AlgebraElement next = t.adjoint() * y * t;
    return Vector(gauge_factor2(n) * next.coords());
  };
  res.window = window_certificate(alg, res.value.action(), N, opts, advance,
                                  res.projection);
  if (res.diagnostics_only) res.window.certified = false;
  return res;
}

//============================================================================
// Power sequence limit
//============================================================================

OrbitLimit power_sequence_limit(const SuperOperator& psi, const Gauge& p,
                                const LimitOptions& opts) {
  const AlgebraPtr& alg = psi.algebra();
  std::int64_t N = std::min(opts.horizon, p.horizon());
  if (alg->elem_dim() > 64) N = std::min<std::int64_t>(N, 512);
  if (N < 64)
    fail(errc::horizon_too_short, "power sequence limit needs horizon >= 64");

  OrbitLimit res{SuperOperator::zero_map(alg), 0.0, 0.0, {}, {}, 0.0, false,
                 {}, {}, false};
  const std::int64_t gauge_n =
      std::min(std::max<std::int64_t>(opts.horizon, 4096), p.horizon());
  res.gauge = analyze_gauge(p, gauge_n, opts.gauge_tol);
  require_regular(res.gauge, opts);
  if (!res.gauge.regular)
    fail(errc::not_regular_gauge,
         "power sequence evaluation supports regular gauges only");

  // Size surrogate: Frobenius norms of the action-matrix powers. This is the
  // L^2 -> L^2 Hilbert-Schmidt bound on phi^n; it brackets the operator norm
  // within a sqrt(rank) factor, which the bounded-domination gate absorbs.
  std::vector<double> lognorms(static_cast<std::size_t>(N) + 1, 0.0);
  {
    Matrix cur = psi.action();
    const double d0 = std::sqrt(static_cast<double>(alg->elem_dim()));
    lognorms[0] = std::log(d0);  // ||I||_F
    double scale = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
      const double nn = frob(cur);
      if (nn <= 0.0) {
        for (std::int64_t m = n; m <= N; ++m)
          lognorms[static_cast<std::size_t>(m)] =
              -std::numeric_limits<double>::infinity();
        break;
      }
      lognorms[static_cast<std::size_t>(n)] = scale + std::log(nn);
      cur /= nn;
      scale += std::log(nn);
      if (n < N) cur = psi.action() * cur;
    }
  }
  res.domination = check_domination(lognorms, p, opts.strict_domination);
  require_dominated(res.domination);

  const CompatResult compat = compatibility_value(lognorms, p, opts);
  res.compat_value = compat.value;
  res.compat_via_qprime = compat.via_qprime;
  require_compatible(compat, opts);

  const double c = res.gauge.growth;
  res.growth = c;
  res.rho = res.gauge.rho_converged ? res.gauge.rho : 1.0;

  Matrix e = fixed_space_projection(psi.action() / c, &res.projection);
  res.value = SuperOperator(alg, e);

  const Matrix& a = psi.action();
  auto advance = [&](const Vector& v, std::int64_t n) {
    return Vector(std::exp(p.log_at(n) - p.log_at(n + 1)) * (a * v));
  };
  res.window = window_certificate(alg, e, N, opts, advance, res.projection);
  return res;
}

//============================================================================
// Structural laws
//============================================================================

std::vector<LawReport> verify_orbit_laws(const AlgebraElement& t,
                                         const OrbitLimit& lim,
                                         double tol_, std::uint64_t seed,
                                         int probes) {
  const AlgebraPtr& alg = t.algebra();
  const SuperOperator& e = lim.value;
  const double c2 = lim.growth * lim.growth;
  std::mt19937_64 rng(seed);

  // Residuals are reported relative to the size of the two sides: the
  // identities are exact statements about E, and the meaningful numerical
  // question is the backward error, not a raw norm that scales with how
  // ill-conditioned the similarity frame happens to be.
  auto rel = [](const AlgebraElement& lhs, const AlgebraElement& rhs) {
    return l2_norm(lhs - rhs) / (1.0 + l2_norm(lhs) + l2_norm(rhs));
  };

  double d_shift_in = 0.0, d_commutant = 0.0, d_shift_out = 0.0,
         d_iterate = 0.0;
  for (int r = 0; r < probes; ++r) {
    AlgebraElement x = random_element(alg, rng);
    AlgebraElement ex = e(x);
    d_shift_in = std::max(
        d_shift_in, rel(e(t.adjoint() * x * t), c2 * ex));
    AlgebraElement a = random_poly(t, rng);
    AlgebraElement b = random_poly(t, rng);
    d_commutant = std::max(
        d_commutant, rel(e(a.adjoint() * x * b), a.adjoint() * ex * b));
    d_shift_out = std::max(
        d_shift_out, rel(t.adjoint() * ex * t, c2 * ex));
    d_iterate = std::max(
        d_iterate, rel(e(ex), complexd(lim.rho, 0.0) * ex));
  }

  // Complete positivity is scale invariant, so certify the unit-norm
  // representative; otherwise the Choi floor would depend on ||E||.
  const double e_scale = std::max(1.0, e.l2_extension_norm());
  CpCertificate cp =
      cp_certificate(complexd(1.0 / e_scale, 0.0) * e);
  const double d_cp =
      std::max(std::max(0.0, -cp.min_eig), cp.herm_defect);
  const double cp_tol = std::min(1e-8, tol_);

  std::vector<LawReport> out;
  out.push_back({"cp", d_cp, d_cp <= cp_tol});
  out.push_back({"shift-in", d_shift_in, d_shift_in <= tol_});
  out.push_back({"commutant", d_commutant, d_commutant <= tol_});
  out.push_back({"shift-out", d_shift_out, d_shift_out <= tol_});
  out.push_back({"iterate", d_iterate, d_iterate <= tol_});
  return out;
}

double hat_transport_defect(const OrbitLimit& lim_t,
                            const OrbitLimit& lim_tstar) {
  Matrix d = tau_adjoint(lim_t.value).action() - lim_tstar.value.action();
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

//============================================================================
// Semigroup limit
//============================================================================

SemigroupLimitResult semigroup_limit(const std::vector<SuperOperator>& family,
                                     double tol_) {
  if (family.empty())
    fail(errc::bad_config, "semigroup limit needs at least one generator");
  const AlgebraPtr& alg = family.front().algebra();
  double scale = 1.0;
  for (const SuperOperator& f : family) {
    if (!f.algebra()->same_structure(*alg))
      fail(errc::shape_mismatch, "generators live in different algebras");
    scale = std::max(scale, frob(f.action()));
  }

  SemigroupLimitResult res{SuperOperator::identity_map(alg), 0.0, 0.0, 0.0,
                           {}, 0};
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i + 1; j < family.size(); ++j)
      res.commutation_defect = std::max(
          res.commutation_defect,
          frob(family[i].action() * family[j].action() -
               family[j].action() * family[i].action()));
  if (res.commutation_defect > std::max(tol_, 1e-8) * scale) {
    std::ostringstream os;
    os << "generators do not commute (defect " << res.commutation_defect
       << ")";
    fail(errc::non_commuting_family, os.str());
  }

  Matrix c0 = family.front().action();
  for (std::size_t i = 1; i < family.size(); ++i) c0 = c0 * family[i].action();

  // The net of finite products is cofinal in powers of the full product; for
  // commuting idempotents it stabilizes immediately. The loop absorbs the
  // residual drift of finite-precision generators and stops once progress
  // stalls at the rounding floor.
  Matrix c = c0;
  double prev_delta = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int it = 0; it < 64; ++it) {
    Matrix next = c0 * c;
    const double delta = frob(next - c) / (1.0 + frob(next));
    c = next;
    ++res.iterations;
    if (!c.allFinite() || frob(c) > 1e6 * scale)
      fail(errc::no_convergence, "semigroup net diverges");
    if (delta <= 1e-13) break;
    if (delta >= 0.5 * prev_delta) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
    prev_delta = delta;
  }

  // The limit is an idempotent; Newton rounds squeeze out whatever
  // idempotency defect the generators carried in.
  for (int round = 0; round < 4; ++round) {
    const Matrix p = c * c;
    const Matrix cand = 3.0 * p - 2.0 * (p * c);
    if (frob(cand * cand - cand) >= frob(p - c)) break;
    c = cand;
  }

  res.limit = SuperOperator(alg, c);
  res.idempotent_residual = frob(c * c - c);
  if (!(res.idempotent_residual <= 1e-6 * scale * (1.0 + frob(c))))
    fail(errc::no_convergence,
         "semigroup net failed to stabilize (idempotency residual " +
             std::to_string(res.idempotent_residual) + ")");
  for (const SuperOperator& f : family)
    res.absorption_defect = std::max(
        res.absorption_defect,
        std::max(frob(c * f.action() - c), frob(f.action() * c - c)));
  res.cp = cp_certificate(res.limit);
  return res;
}

//============================================================================
// Similarity pipeline
//============================================================================

namespace {

Vector min_eig_witness(const AlgebraElement& h) {
  const AlgebraPtr& alg = h.algebra();
  Vector witness = Vector::Zero(alg->total_dim());
  double best = std::numeric_limits<double>::infinity();
  for (int b = 0; b < alg->block_count(); ++b) {
    Matrix sym = 0.5 * (h.block(b) + h.block(b).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.eigenvalues()(0) < best) {
      best = es.eigenvalues()(0);
      witness.setZero();
      witness.segment(alg->dir_offset(b), alg->dim(b)) =
          es.eigenvectors().col(0);
    }
  }
  return witness;
}

AlgebraElement hermitize(const AlgebraElement& x) {
  return complexd(0.5, 0.0) * (x + x.adjoint());
}

}  // namespace

SimilarityReport similarity(const std::vector<AlgebraElement>& family,
                            const std::vector<Gauge>& gauges,
                            const LimitOptions& opts) {
  if (family.empty())
    fail(errc::bad_config, "similarity needs at least one operator");
  if (gauges.size() != family.size())
    fail(errc::bad_config, "need one gauge per operator");
  const AlgebraPtr& alg = family.front().algebra();

  SimilarityReport rep;

  double tscale = 1.0;
  for (const AlgebraElement& t : family) {
    if (!t.algebra()->same_structure(*alg))
      fail(errc::shape_mismatch, "operators live in different algebras");
    tscale = std::max(tscale, op_norm(t));
  }
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const double d = op_norm(family[i] * family[j] - family[j] * family[i]);
      if (d > 1e-8 * tscale * tscale) {
        rep.code = errc::non_commuting_family;
        std::ostringstream os;
        os << "operators " << i << " and " << j << " do not commute (defect "
           << d << ")";
        rep.message = os.str();
        return rep;
      }
    }

  for (std::size_t i = 0; i < family.size(); ++i) {
    try {
      rep.limits.push_back(orbit_limit(family[i], gauges[i], opts));
    } catch (const Error& err) {
      rep.code = err.code();
      std::ostringstream os;
      os << "operator " << i << ": " << err.what();
      rep.message = os.str();
      return rep;
    }
    rep.growths.push_back(rep.limits.back().growth);
  }

  std::vector<SuperOperator> es;
  for (const OrbitLimit& l : rep.limits) es.push_back(l.value);
  try {
    rep.joint = semigroup_limit(es);
  } catch (const Error& err) {
    rep.code = err.code();
    rep.message = err.what();
    return rep;
  }
  const SuperOperator& f = rep.joint->limit;

  AlgebraElement ei = hermitize(f(AlgebraElement::identity(alg)));
  rep.fixed_identity = ei;
  const std::vector<double> eigs = spectrum_hermitian(ei, 1e-6);
  const double max_eig = eigs.empty() ? 0.0 : eigs.back();
  const double min_eig = eigs.empty() ? 0.0 : eigs.front();
  if (min_eig <= std::max(1e-8 * max_eig, 1e-12)) {
    rep.code = errc::not_c1;
    std::ostringstream os;
    os << "joint fixed identity F(1) is singular (min eigenvalue " << min_eig
       << "); no similarity exists over the carrier of the witness";
    rep.message = os.str();
    rep.nullspace_witness = min_eig_witness(ei);
    return rep;
  }

  AlgebraElement a = sqrt_psd(ei);
  AlgebraElement ainv = invert(a);
  rep.similarity_root = a;

  AlgebraElement identity = AlgebraElement::identity(alg);
  for (std::size_t i = 0; i < family.size(); ++i) {
    AlgebraElement u =
        complexd(1.0 / rep.growths[i], 0.0) * (a * family[i] * ainv);
    rep.unitaries.push_back(u);
    rep.max_unitarity_defect = std::max(
        rep.max_unitarity_defect, op_norm(u.adjoint() * u - identity));
  }
  for (std::size_t i = 0; i < rep.unitaries.size(); ++i)
    for (std::size_t j = i + 1; j < rep.unitaries.size(); ++j)
      rep.max_commutation_defect = std::max(
          rep.max_commutation_defect,
          op_norm(rep.unitaries[i] * rep.unitaries[j] -
                  rep.unitaries[j] * rep.unitaries[i]));

  AlgebraElement fhat_id = hermitize(tau_adjoint(f)(identity));
  AlgebraElement r = hermitize(a * fhat_id * a);
  rep.r_spectrum = spectrum_hermitian(r, 1e-6);
  rep.r_min = rep.r_spectrum.empty() ? 0.0 : rep.r_spectrum.front();

  if (rep.max_unitarity_defect > 1e-6) {
    rep.code = errc::unitarity_defect;
    rep.message = "intertwined operators are not unitary within tolerance";
    return rep;
  }
  if (rep.max_commutation_defect > 1e-6) {
    rep.code = errc::commutation_defect;
    rep.message = "intertwined unitaries fail to commute within tolerance";
    return rep;
  }
  rep.success = true;
  rep.message = "similarity established";
  return rep;
}

SimilarityReport similarity_auto(const std::vector<AlgebraElement>& family,
                                 const LimitOptions& opts) {
  std::vector<Gauge> gauges;
  for (const AlgebraElement& t : family) {
    const double r = spectral_radius(t);
    if (r < 1e-12)
      fail(errc::not_compatible,
           "operator orbit vanishes; no geometric gauge renormalizes it");
    gauges.push_back(Gauge::geometric(r));
  }
  return similarity(family, gauges, opts);
}

SimilarityReport intertwine_unitaries(const std::vector<AlgebraElement>& family,
                                      const std::vector<Gauge>& gauges,
                                      const LimitOptions& opts) {
  SimilarityReport rep = similarity(family, gauges, opts);
  if (!rep.success)
    // This entry point promises unitaries, so a degenerate fixed identity is
    // reported as the precondition failure it is, not as a verdict.
    fail(rep.code == errc::not_c1 ? errc::singular_ei : rep.code, rep.message);
  return rep;
}

//============================================================================
// Asymptotic control report
//============================================================================

AsymptoticControlReport asymptotic_control_report(const AlgebraElement& t,
                                                  const Gauge& p,
                                                  const LimitOptions& opts) {
  const std::int64_t N = std::min(opts.horizon, p.horizon());
  if (N < 64)
    fail(errc::horizon_too_short, "control report needs horizon >= 64");
  AsymptoticControlReport rep;
  const std::int64_t gauge_n =
      std::min(std::max<std::int64_t>(opts.horizon, 4096), p.horizon());
  rep.gauge = analyze_gauge(p, gauge_n, opts.gauge_tol);
  rep.gamma = rep.gauge.gamma;
  rep.rho = rep.gauge.rho;

  const std::vector<double> logorb = log_orbit_norms(t, N);
  rep.strict_domination = check_domination(logorb, p, true);
  rep.bounded_domination = check_domination(logorb, p, false);

  std::vector<double> u(static_cast<std::size_t>(N) + 1);
  for (std::int64_t n = 0; n <= N; ++n) {
    const double lr = logorb[static_cast<std::size_t>(n)] - p.log_at(n);
    u[static_cast<std::size_t>(n)] = lr < -700.0 ? 0.0 : std::exp(lr);
  }
  rep.ratio_almost = almost_limit(u, std::max(1e-3, opts.tol));
  rep.ratio_qprime = q_prime(u);
  const double compat_value = rep.ratio_almost.converged
                                  ? rep.ratio_almost.estimate
                                  : rep.ratio_qprime.value;
  rep.compatible =
      rep.bounded_domination.dominated && compat_value > opts.compat_tol;
  return rep;
}

}  // namespace finvn
