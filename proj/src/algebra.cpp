#include "finvn/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace finvn {

const char* errc_name(errc c) {
  switch (c) {
    case errc::not_hermitian: return "NotHermitian";
    case errc::not_psd: return "NotPSD";
    case errc::singular: return "Singular";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::horizon_too_short: return "HorizonTooShort";
    case errc::not_a_gauge: return "NotAGauge";
    case errc::not_almost_convergent: return "NotAlmostConvergent";
    case errc::not_dominated: return "NotDominated";
    case errc::not_regular_gauge: return "NotRegularGauge";
    case errc::not_compatible: return "NotCompatible";
    case errc::non_commuting_family: return "NonCommutingFamily";
    case errc::no_convergence: return "NoConvergence";
    case errc::not_c1: return "NotC1";
    case errc::singular_ei: return "SingularEI";
    case errc::unitarity_defect: return "UnitarityDefect";
    case errc::commutation_defect: return "CommutationDefect";
    case errc::law_violation: return "LawViolation";
    case errc::resource_limit: return "ResourceLimit";
    case errc::not_2_positive: return "Not2Positive";
    case errc::dimension_too_large: return "DimensionTooLarge";
    case errc::bad_config: return "BadConfig";
  }
  return "UnknownError";
}

//============================================================================
// BlockAlgebra
//============================================================================

BlockAlgebra::BlockAlgebra(std::vector<int> dims, std::vector<double> weights)
    : dims_(std::move(dims)), weights_(std::move(weights)) {
  if (dims_.empty() || dims_.size() != weights_.size())
    fail(errc::bad_config, "block dims and weights must be nonempty and match");
  for (std::size_t b = 0; b < dims_.size(); ++b) {
    if (dims_[b] < 1)
      fail(errc::bad_config, "block dimension must be >= 1");
    if (!(weights_[b] > 0.0) || !std::isfinite(weights_[b]))
      fail(errc::bad_config, "trace weights must be finite and > 0");
  }
  vec_offsets_.resize(dims_.size());
  dir_offsets_.resize(dims_.size());
  for (std::size_t b = 0; b < dims_.size(); ++b) {
    vec_offsets_[b] = elem_dim_;
    dir_offsets_[b] = total_dim_;
    elem_dim_ += dims_[b] * dims_[b];
    total_dim_ += dims_[b];
  }
  invol_.resize(elem_dim_);
  for (int b = 0; b < block_count(); ++b)
    for (int i = 0; i < dims_[b]; ++i)
      for (int j = 0; j < dims_[b]; ++j)
        invol_[coord_index(b, i, j)] = coord_index(b, j, i);
}

AlgebraPtr BlockAlgebra::amplified(const AlgebraPtr& base, int n) {
  if (n < 1) fail(errc::bad_config, "amplification order must be >= 1");
  std::vector<int> dims;
  dims.reserve(base->dims().size());
  for (int d : base->dims()) dims.push_back(n * d);
  return make(std::move(dims), base->weights());
}

//============================================================================
// AlgebraElement
//============================================================================

namespace {

void check_finite(const Matrix& m, const char* ctx) {
  if (!m.allFinite()) fail(errc::bad_config, std::string(ctx) + ": non-finite entry");
}

void check_same_algebra(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.algebra() == b.algebra()) return;
  if (!a.algebra()->same_structure(*b.algebra()))
    fail(errc::shape_mismatch, "elements live in different algebras");
}

}  // namespace

AlgebraElement::AlgebraElement(AlgebraPtr algebra, std::vector<Matrix> mats)
    : alg_(std::move(algebra)), mats_(std::move(mats)) {
  if (!alg_) fail(errc::bad_config, "null algebra");
  if (static_cast<int>(mats_.size()) != alg_->block_count())
    fail(errc::shape_mismatch, "wrong number of blocks");
  for (int b = 0; b < alg_->block_count(); ++b) {
    const int d = alg_->dim(b);
    if (mats_[b].rows() != d || mats_[b].cols() != d) {
      std::ostringstream os;
      os << "block " << b << " has shape " << mats_[b].rows() << "x"
         << mats_[b].cols() << ", expected " << d << "x" << d;
      fail(errc::shape_mismatch, os.str());
    }
    check_finite(mats_[b], "element block");
  }
}

AlgebraElement AlgebraElement::zero(const AlgebraPtr& algebra) {
  std::vector<Matrix> mats;
  mats.reserve(algebra->block_count());
  for (int b = 0; b < algebra->block_count(); ++b)
    mats.push_back(Matrix::Zero(algebra->dim(b), algebra->dim(b)));
  return AlgebraElement(algebra, std::move(mats));
}

AlgebraElement AlgebraElement::identity(const AlgebraPtr& algebra) {
  std::vector<Matrix> mats;
  mats.reserve(algebra->block_count());
  for (int b = 0; b < algebra->block_count(); ++b)
    mats.push_back(Matrix::Identity(algebra->dim(b), algebra->dim(b)));
  return AlgebraElement(algebra, std::move(mats));
}

AlgebraElement AlgebraElement::from_block(const AlgebraPtr& algebra, int b,
                                          const Matrix& m) {
  if (b < 0 || b >= algebra->block_count())
    fail(errc::shape_mismatch, "block index out of range");
  AlgebraElement out = zero(algebra);
  if (m.rows() != algebra->dim(b) || m.cols() != algebra->dim(b))
    fail(errc::shape_mismatch, "block matrix has wrong shape");
  out.mats_[b] = m;
  check_finite(m, "from_block");
  return out;
}

AlgebraElement AlgebraElement::adjoint() const {
  std::vector<Matrix> mats;
  mats.reserve(mats_.size());
  for (const Matrix& m : mats_) mats.push_back(m.adjoint());
  return AlgebraElement(alg_, std::move(mats));
}

Vector AlgebraElement::coords() const {
  Vector v(alg_->elem_dim());
  for (int b = 0; b < alg_->block_count(); ++b) {
    const double s = std::sqrt(alg_->weight(b));
    const int d = alg_->dim(b);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        v(alg_->coord_index(b, i, j)) = s * mats_[b](i, j);
  }
  return v;
}

AlgebraElement AlgebraElement::from_coords(const AlgebraPtr& algebra,
                                           const Vector& coords) {
  if (coords.size() != algebra->elem_dim())
    fail(errc::shape_mismatch, "coordinate vector has wrong length");
  std::vector<Matrix> mats;
  mats.reserve(algebra->block_count());
  for (int b = 0; b < algebra->block_count(); ++b) {
    const double s = 1.0 / std::sqrt(algebra->weight(b));
    const int d = algebra->dim(b);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        m(i, j) = s * coords(algebra->coord_index(b, i, j));
    mats.push_back(std::move(m));
  }
  return AlgebraElement(algebra, std::move(mats));
}

Matrix AlgebraElement::dense() const {
  Matrix m = Matrix::Zero(alg_->total_dim(), alg_->total_dim());
  for (int b = 0; b < alg_->block_count(); ++b) {
    const int off = alg_->dir_offset(b);
    const int d = alg_->dim(b);
    m.block(off, off, d, d) = mats_[b];
  }
  return m;
}

Vector AlgebraElement::apply_vec(const Vector& x) const {
  if (x.size() != alg_->total_dim())
    fail(errc::shape_mismatch, "vector has wrong length");
  Vector y(x.size());
  for (int b = 0; b < alg_->block_count(); ++b) {
    const int off = alg_->dir_offset(b);
    const int d = alg_->dim(b);
    y.segment(off, d) = mats_[b] * x.segment(off, d);
  }
  return y;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& rhs) {
  check_same_algebra(*this, rhs);
  for (std::size_t b = 0; b < mats_.size(); ++b) mats_[b] += rhs.mats_[b];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& rhs) {
  check_same_algebra(*this, rhs);
  for (std::size_t b = 0; b < mats_.size(); ++b) mats_[b] -= rhs.mats_[b];
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(complexd s) {
  for (Matrix& m : mats_) m *= s;
  return *this;
}

AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  check_same_algebra(a, b);
  std::vector<Matrix> mats;
  mats.reserve(a.mats_.size());
  for (std::size_t k = 0; k < a.mats_.size(); ++k)
    mats.push_back(a.mats_[k] * b.mats_[k]);
  return AlgebraElement(a.alg_, std::move(mats));
}

//============================================================================
// Trace and norms
//============================================================================

complexd trace(const AlgebraElement& a) {
  complexd t = 0.0;
  const auto& alg = *a.algebra();
  for (int b = 0; b < alg.block_count(); ++b)
    t += alg.weight(b) * a.block(b).trace();
  return t;
}

complexd l2_inner(const AlgebraElement& x, const AlgebraElement& y) {
  check_same_algebra(x, y);
  // tau(Y* X) = sum_b w_b Tr(Y_b^* X_b) = sum_b w_b <vec X_b, vec Y_b>.
  complexd t = 0.0;
  const auto& alg = *x.algebra();
  for (int b = 0; b < alg.block_count(); ++b)
    t += alg.weight(b) * (y.block(b).adjoint() * x.block(b)).trace();
  return t;
}

double l2_norm(const AlgebraElement& x) {
  double s = 0.0;
  const auto& alg = *x.algebra();
  for (int b = 0; b < alg.block_count(); ++b)
    s += alg.weight(b) * x.block(b).squaredNorm();
  return std::sqrt(s);
}

double op_norm(const AlgebraElement& a) {
  double n = 0.0;
  for (int b = 0; b < a.block_count(); ++b) {
    if (a.block(b).size() == 0) continue;
    Eigen::JacobiSVD<Matrix> svd(a.block(b));
    n = std::max(n, svd.singularValues()(0));
  }
  return n;
}

namespace {

double hermiticity_defect(const AlgebraElement& a) {
  double d = 0.0;
  for (int b = 0; b < a.block_count(); ++b)
    d = std::max(d, (a.block(b) - a.block(b).adjoint()).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

std::vector<double> spectrum_hermitian(const AlgebraElement& a, double tol_) {
  const double defect = hermiticity_defect(a);
  if (defect > tol_) {
    std::ostringstream os;
    os << "Hermiticity defect " << defect << " exceeds tolerance " << tol_;
    fail(errc::not_hermitian, os.str());
  }
  std::vector<double> eigs;
  for (int b = 0; b < a.block_count(); ++b) {
    Matrix h = 0.5 * (a.block(b) + a.block(b).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      eigs.push_back(es.eigenvalues()(i));
  }
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

std::vector<complexd> spectrum(const AlgebraElement& a) {
  std::vector<complexd> eigs;
  for (int b = 0; b < a.block_count(); ++b) {
    Eigen::ComplexEigenSolver<Matrix> es(a.block(b), false);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      eigs.push_back(es.eigenvalues()(i));
  }
  return eigs;
}

double spectral_radius(const AlgebraElement& a) {
  double r = 0.0;
  for (const complexd& z : spectrum(a)) r = std::max(r, std::abs(z));
  return r;
}

AlgebraElement sqrt_psd(const AlgebraElement& a, double tol_) {
  const double defect = hermiticity_defect(a);
  if (defect > tol::algebraic)
    fail(errc::not_hermitian, "sqrt_psd requires a Hermitian input");
  std::vector<Matrix> mats;
  for (int b = 0; b < a.block_count(); ++b) {
    Matrix h = 0.5 * (a.block(b) + a.block(b).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& ev = es.eigenvalues();
    const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
    if (ev(0) < -tol_ * scale) {
      std::ostringstream os;
      os << "min eigenvalue " << ev(0) << " in block " << b;
      fail(errc::not_psd, os.str());
    }
    Eigen::VectorXd roots(ev.size());
    for (int i = 0; i < ev.size(); ++i)
      roots(i) = std::sqrt(std::max(0.0, ev(i)));
    mats.push_back(es.eigenvectors() * roots.asDiagonal().toDenseMatrix().cast<complexd>() *
                   es.eigenvectors().adjoint());
  }
  return AlgebraElement(a.algebra(), std::move(mats));
}

AlgebraElement invert(const AlgebraElement& a, double tol_) {
  std::vector<Matrix> mats;
  for (int b = 0; b < a.block_count(); ++b) {
    Eigen::JacobiSVD<Matrix> svd(a.block(b));
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= tol_ * sv(0)) {
      std::ostringstream os;
      os << "block " << b << " numerically singular (sigma_min/sigma_max = "
         << (sv.size() ? sv(sv.size() - 1) / sv(0) : 0.0) << ")";
      fail(errc::singular, os.str());
    }
    mats.push_back(a.block(b).inverse());
  }
  return AlgebraElement(a.algebra(), std::move(mats));
}

std::pair<AlgebraElement, AlgebraElement> polar(const AlgebraElement& a,
                                                double tol_) {
  // A = U P with P = (A* A)^{1/2}; restricted to invertible A so U is the
  // honest unitary part, not just a partial isometry.
  std::vector<Matrix> us, ps;
  for (int b = 0; b < a.block_count(); ++b) {
    Eigen::JacobiSVD<Matrix> svd(a.block(b),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= tol_ * sv(0))
      fail(errc::singular, "polar decomposition requires an invertible input");
    us.push_back(svd.matrixU() * svd.matrixV().adjoint());
    ps.push_back(svd.matrixV() *
                 sv.asDiagonal().toDenseMatrix().cast<complexd>() *
                 svd.matrixV().adjoint());
  }
  return {AlgebraElement(a.algebra(), std::move(us)),
          AlgebraElement(a.algebra(), std::move(ps))};
}

bool is_unitary(const AlgebraElement& a, double tol_) {
  for (int b = 0; b < a.block_count(); ++b) {
    const Matrix& m = a.block(b);
    Matrix d = m.adjoint() * m - Matrix::Identity(m.rows(), m.cols());
    if (d.cwiseAbs().maxCoeff() > tol_) return false;
  }
  return true;
}

bool is_positive_el(const AlgebraElement& a, double tol_) {
  if (hermiticity_defect(a) > tol_) return false;
  for (int b = 0; b < a.block_count(); ++b) {
    Matrix h = 0.5 * (a.block(b) + a.block(b).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol_) return false;
  }
  return true;
}

bool commute(const AlgebraElement& a, const AlgebraElement& b, double tol_) {
  check_same_algebra(a, b);
  for (int k = 0; k < a.block_count(); ++k) {
    Matrix c = a.block(k) * b.block(k) - b.block(k) * a.block(k);
    if (c.cwiseAbs().maxCoeff() > tol_) return false;
  }
  return true;
}

//============================================================================
// Amplification
//============================================================================

AlgebraElement amp_embed(const AlgebraPtr& base, int n,
                         const std::vector<AlgebraElement>& grid) {
  if (static_cast<int>(grid.size()) != n * n)
    fail(errc::shape_mismatch, "amplification grid must have n*n entries");
  AlgebraPtr amp = BlockAlgebra::amplified(base, n);
  std::vector<Matrix> mats;
  for (int b = 0; b < base->block_count(); ++b) {
    const int d = base->dim(b);
    Matrix m = Matrix::Zero(n * d, n * d);
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h) {
        const AlgebraElement& e = grid[g * n + h];
        if (!e.algebra()->same_structure(*base))
          fail(errc::shape_mismatch, "grid entry lives in a different algebra");
        m.block(g * d, h * d, d, d) = e.block(b);
      }
    mats.push_back(std::move(m));
  }
  return AlgebraElement(amp, std::move(mats));
}

AlgebraElement amp_entry(const AlgebraPtr& base, int n,
                         const AlgebraElement& amp_el, int g, int h) {
  if (g < 0 || g >= n || h < 0 || h >= n)
    fail(errc::shape_mismatch, "grid index out of range");
  std::vector<Matrix> mats;
  for (int b = 0; b < base->block_count(); ++b) {
    const int d = base->dim(b);
    if (amp_el.block(b).rows() != n * d)
      fail(errc::shape_mismatch, "element does not belong to the n-fold amplification");
    mats.push_back(amp_el.block(b).block(g * d, h * d, d, d));
  }
  return AlgebraElement(base, std::move(mats));
}

complexd amplification_trace(const AlgebraPtr& base, int n,
                             const AlgebraElement& amp_el) {
  complexd t = 0.0;
  for (int k = 0; k < n; ++k) t += trace(amp_entry(base, n, amp_el, k, k));
  return t;
}

//============================================================================
// TraceFunctional
//============================================================================

TraceFunctional::TraceFunctional(AlgebraPtr algebra, AlgebraElement rep)
    : alg_(std::move(algebra)), rep_(std::move(rep)) {
  if (!rep_.algebra()->same_structure(*alg_))
    fail(errc::shape_mismatch, "representative lives in a different algebra");
}

TraceFunctional TraceFunctional::vector_state(const AlgebraPtr& algebra,
                                              const Vector& x) {
  if (x.size() != algebra->total_dim())
    fail(errc::shape_mismatch, "state vector has wrong length");
  // <X x, x> = sum_b x_b^* X_b x_b = tau(Z X) with Z_b = x_b x_b^* / w_b.
  std::vector<Matrix> mats;
  for (int b = 0; b < algebra->block_count(); ++b) {
    const int off = algebra->dir_offset(b);
    const int d = algebra->dim(b);
    Vector xb = x.segment(off, d);
    mats.push_back((xb * xb.adjoint()) / algebra->weight(b));
  }
  return TraceFunctional(algebra, AlgebraElement(algebra, std::move(mats)));
}

complexd TraceFunctional::operator()(const AlgebraElement& x) const {
  return trace(rep_ * x);
}

}  // namespace finvn
