#include "finvn/supermap.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <sstream>

namespace finvn {

namespace {

constexpr int kMaxActionDim = 4096;  // explicit action matrices above this blow memory

void check_action_dim(const BlockAlgebra& alg) {
  if (alg.elem_dim() > kMaxActionDim) {
    std::ostringstream os;
    os << "coordinate dimension " << alg.elem_dim()
       << " exceeds the explicit action-matrix cap " << kMaxActionDim;
    fail(errc::resource_limit, os.str());
  }
}

}  // namespace

SuperOperator::SuperOperator(AlgebraPtr algebra, Matrix action)
    : alg_(std::move(algebra)), action_(std::move(action)) {
  if (!alg_) fail(errc::bad_config, "null algebra");
  check_action_dim(*alg_);
  if (action_.rows() != alg_->elem_dim() || action_.cols() != alg_->elem_dim())
    fail(errc::shape_mismatch, "action matrix has wrong shape");
  if (!action_.allFinite())
    fail(errc::bad_config, "action matrix has non-finite entries");
}

SuperOperator SuperOperator::identity_map(const AlgebraPtr& algebra) {
  check_action_dim(*algebra);
  return SuperOperator(
      algebra, Matrix::Identity(algebra->elem_dim(), algebra->elem_dim()));
}

SuperOperator SuperOperator::zero_map(const AlgebraPtr& algebra) {
  check_action_dim(*algebra);
  return SuperOperator(algebra,
                       Matrix::Zero(algebra->elem_dim(), algebra->elem_dim()));
}

SuperOperator SuperOperator::sandwich(const AlgebraElement& a,
                                      const AlgebraElement& b) {
  const AlgebraPtr& alg = a.algebra();
  if (!alg->same_structure(*b.algebra()))
    fail(errc::shape_mismatch, "sandwich factors live in different algebras");
  check_action_dim(*alg);
  // X -> A X B acts blockwise; on vec(X_b) row-major this is A_b (x) B_b^T.
  Matrix s = Matrix::Zero(alg->elem_dim(), alg->elem_dim());
  for (int blk = 0; blk < alg->block_count(); ++blk) {
    const int d = alg->dim(blk);
    const Matrix& A = a.block(blk);
    const Matrix& B = b.block(blk);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l)
            s(alg->coord_index(blk, i, j), alg->coord_index(blk, k, l)) =
                A(i, k) * B(l, j);
  }
  return SuperOperator(alg, std::move(s));
}

SuperOperator SuperOperator::from_function(
    const AlgebraPtr& algebra,
    const std::function<AlgebraElement(const AlgebraElement&)>& fn) {
  check_action_dim(*algebra);
  const int n = algebra->elem_dim();
  Matrix s(n, n);
  for (int c = 0; c < n; ++c) {
    Vector basis = Vector::Zero(n);
    basis(c) = 1.0;
    AlgebraElement out = fn(AlgebraElement::from_coords(algebra, basis));
    if (!out.algebra()->same_structure(*algebra))
      fail(errc::shape_mismatch, "callback changed the algebra");
    s.col(c) = out.coords();
  }
  return SuperOperator(algebra, std::move(s));
}

AlgebraElement SuperOperator::apply(const AlgebraElement& x) const {
  if (!x.algebra()->same_structure(*alg_))
    fail(errc::shape_mismatch, "element lives in a different algebra");
  return AlgebraElement::from_coords(alg_, action_ * x.coords());
}

SuperOperator SuperOperator::compose(const SuperOperator& inner) const {
  if (!inner.alg_->same_structure(*alg_))
    fail(errc::shape_mismatch, "composing maps over different algebras");
  return SuperOperator(alg_, action_ * inner.action_);
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& rhs) {
  if (!rhs.alg_->same_structure(*alg_))
    fail(errc::shape_mismatch, "adding maps over different algebras");
  action_ += rhs.action_;
  return *this;
}

SuperOperator& SuperOperator::operator-=(const SuperOperator& rhs) {
  if (!rhs.alg_->same_structure(*alg_))
    fail(errc::shape_mismatch, "subtracting maps over different algebras");
  action_ -= rhs.action_;
  return *this;
}

SuperOperator& SuperOperator::operator*=(complexd s) {
  action_ *= s;
  return *this;
}

double SuperOperator::l2_extension_norm() const {
  if (action_.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(action_);
  return svd.singularValues()(0);
}

//============================================================================
// tau-adjoint
//============================================================================

SuperOperator tau_adjoint(const SuperOperator& phi) {
  const auto& alg = *phi.algebra();
  const auto& p = alg.involution_permutation();
  const Matrix& s = phi.action();
  const int n = alg.elem_dim();
  // hat(S) = P S^T P entrywise: hat(S)(r,c) = S(p(c), p(r)). Plain
  // transpose, no conjugation: the pairing tau(phi(X) Y) is bilinear.
  Matrix h(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) h(r, c) = s(p[c], p[r]);
  return SuperOperator(phi.algebra(), std::move(h));
}

double adjoint_involution_defect(const SuperOperator& phi) {
  Matrix d = tau_adjoint(tau_adjoint(phi)).action() - phi.action();
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

double hermiticity_preservation_defect(const SuperOperator& phi) {
  const auto& alg = *phi.algebra();
  const auto& p = alg.involution_permutation();
  const Matrix& s = phi.action();
  const int n = alg.elem_dim();
  // phi(X*) = phi(X)* for all X iff P S P = conj(S).
  double defect = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      defect = std::max(defect, std::abs(s(p[r], p[c]) - std::conj(s(r, c))));
  return defect;
}

bool is_unital(const SuperOperator& phi, double tol_) {
  AlgebraElement d =
      phi(AlgebraElement::identity(phi.algebra())) -
      AlgebraElement::identity(phi.algebra());
  return op_norm(d) <= tol_;
}

bool is_trace_preserving(const SuperOperator& phi, double tol_) {
  return is_unital(tau_adjoint(phi), tol_);
}

//============================================================================
// Choi certificate
//============================================================================

CpCertificate cp_certificate(const SuperOperator& phi, double tol_) {
  const AlgebraPtr& alg = phi.algebra();
  const int D = alg->total_dim();
  CpCertificate cert;
  cert.min_eig = std::numeric_limits<double>::infinity();
  for (int b = 0; b < alg->block_count(); ++b) {
    const int d = alg->dim(b);
    Matrix choi = Matrix::Zero(d * D, d * D);
    Matrix unit = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        unit(i, j) = 1.0;
        AlgebraElement out =
            phi(AlgebraElement::from_block(alg, b, unit));
        choi.block(i * D, j * D, D, D) = out.dense();
        unit(i, j) = 0.0;
      }
    const double hd = (choi - choi.adjoint()).cwiseAbs().maxCoeff();
    cert.herm_defect = std::max(cert.herm_defect, hd);
    Matrix sym = 0.5 * (choi + choi.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double mev = es.eigenvalues()(0);
    cert.block_min_eigs.push_back(mev);
    cert.min_eig = std::min(cert.min_eig, mev);
  }
  cert.cp = cert.min_eig >= -tol_ && cert.herm_defect <= tol_;
  return cert;
}

//============================================================================
// Amplification
//============================================================================

AlgebraElement amplified_apply(const SuperOperator& phi, int n,
                               const AlgebraElement& x) {
  const AlgebraPtr& base = phi.algebra();
  std::vector<AlgebraElement> grid;
  grid.reserve(static_cast<std::size_t>(n) * n);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      grid.push_back(phi(amp_entry(base, n, x, g, h)));
  return amp_embed(base, n, grid);
}

SuperOperator amplify(const SuperOperator& phi, int n) {
  const AlgebraPtr& base = phi.algebra();
  if (n < 1) fail(errc::bad_config, "amplification order must be >= 1");
  const std::int64_t amp_elem =
      static_cast<std::int64_t>(n) * n * base->elem_dim();
  if (amp_elem > kMaxActionDim)
    fail(errc::resource_limit,
         "amplified action matrix too large; use amplified_apply instead");
  AlgebraPtr amp = BlockAlgebra::amplified(base, n);
  return SuperOperator::from_function(amp, [&](const AlgebraElement& x) {
    return amplified_apply(phi, n, x);
  });
}

//============================================================================
// Positivity verdicts
//============================================================================

namespace {

double min_eig_symmetrized(const AlgebraElement& a, double* herm_defect) {
  double mev = std::numeric_limits<double>::infinity();
  double hd = 0.0;
  for (int b = 0; b < a.block_count(); ++b) {
    const Matrix& m = a.block(b);
    hd = std::max(hd, (m - m.adjoint()).cwiseAbs().maxCoeff());
    Matrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    mev = std::min(mev, es.eigenvalues()(0));
  }
  if (herm_defect) *herm_defect = hd;
  return mev;
}

}  // namespace

PositivityReport positivity_check(const SuperOperator& phi, int n, double tol_,
                                  std::uint64_t seed) {
  const AlgebraPtr& base = phi.algebra();
  if (n < 1) fail(errc::bad_config, "amplification order must be >= 1");
  if (static_cast<std::int64_t>(n) * base->total_dim() > 512)
    fail(errc::resource_limit,
         "positivity check limited to n * total_dim <= 512");

  PositivityReport rep;
  CpCertificate cert = cp_certificate(phi, tol_);
  rep.choi_min_eig = cert.min_eig;
  if (cert.cp) {
    rep.verdict = PositivityVerdict::positive;
    rep.note = "Choi certificate PSD: completely positive, hence n-positive";
    return rep;
  }

  // Choi has a negative block b*. If n >= d_{b*} the entangled rank-one
  // input Omega Omega* with Omega = sum_i e_i (x) e^{(b*)}_i exhibits the
  // Choi matrix itself as the output, so the violation is explicit.
  int worst = 0;
  for (std::size_t b = 1; b < cert.block_min_eigs.size(); ++b)
    if (cert.block_min_eigs[b] < cert.block_min_eigs[worst])
      worst = static_cast<int>(b);
  const int d = base->dim(worst);
  if (cert.block_min_eigs[worst] < -tol_ && n >= d) {
    std::vector<AlgebraElement> grid(
        static_cast<std::size_t>(n) * n, AlgebraElement::zero(base));
    Matrix unit = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        unit(i, j) = 1.0;
        grid[static_cast<std::size_t>(i) * n + j] =
            AlgebraElement::from_block(base, worst, unit);
        unit(i, j) = 0.0;
      }
    AlgebraElement witness = amp_embed(base, n, grid);
    AlgebraElement out = amplified_apply(phi, n, witness);
    rep.witness = witness;
    rep.witness_output_min_eig = min_eig_symmetrized(out, nullptr);
    if (rep.witness_output_min_eig < -tol_) {
      rep.verdict = PositivityVerdict::violated;
      rep.note = "entangled rank-one input maps to a non-PSD output";
      return rep;
    }
    rep.witness.reset();
  }

  // Randomized search over rank-one PSD inputs of the amplification.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AlgebraPtr amp = BlockAlgebra::amplified(base, n);
  for (int probe = 0; probe < 64; ++probe) {
    std::vector<Matrix> mats;
    for (int b = 0; b < amp->block_count(); ++b) {
      const int dd = amp->dim(b);
      Vector v(dd);
      for (int i = 0; i < dd; ++i) v(i) = complexd(gauss(rng), gauss(rng));
      mats.push_back(v * v.adjoint());
    }
    AlgebraElement x(amp, std::move(mats));
    AlgebraElement out = amplified_apply(phi, n, x);
    double hd = 0.0;
    const double mev = min_eig_symmetrized(out, &hd);
    // A positive map is automatically hermiticity preserving, so either kind
    // of defect on a PSD input is a genuine violation.
    if (mev < -tol_ * std::max(1.0, op_norm(x)) || hd > tol_) {
      rep.verdict = PositivityVerdict::violated;
      rep.witness = x;
      rep.witness_output_min_eig = mev;
      rep.note = "random rank-one PSD input maps to a non-PSD output";
      return rep;
    }
  }

  rep.verdict = PositivityVerdict::inconclusive;
  rep.note =
      "Choi certificate has negative eigenvalues but no positivity violation "
      "was found at this amplification order";
  return rep;
}

double positive_map_norm(const SuperOperator& phi, double tol_) {
  CpCertificate cert = cp_certificate(phi, tol_);
  if (!cert.cp) {
    std::ostringstream os;
    os << "||phi(1)|| formula needs a CP map; Choi min eigenvalue "
       << cert.min_eig;
    fail(errc::not_psd, os.str());
  }
  return op_norm(phi(AlgebraElement::identity(phi.algebra())));
}

}  // namespace finvn
