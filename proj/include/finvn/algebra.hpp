#ifndef FINVN_ALGEBRA_HPP
#define FINVN_ALGEBRA_HPP

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include "finvn/error.hpp"

namespace finvn {

using complexd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Default precision contract: algebraic identities are expected to hold to
// `algebraic`, iteratively computed limits to `iterative`.
struct tol {
  static constexpr double algebraic = 1e-9;
  static constexpr double iterative = 1e-6;
};

//============================================================================
// BlockAlgebra — a finite direct sum of full matrix blocks M_{d_b}(C) with a
// weighted trace tau(A) = sum_b w_b Tr(A_b). All weights strictly positive,
// so tau is faithful.
//============================================================================

class BlockAlgebra;
using AlgebraPtr = std::shared_ptr<const BlockAlgebra>;

class BlockAlgebra {
 public:
  BlockAlgebra(std::vector<int> dims, std::vector<double> weights);

  static AlgebraPtr make(std::vector<int> dims, std::vector<double> weights) {
    return std::make_shared<const BlockAlgebra>(std::move(dims),
                                                std::move(weights));
  }
  // Single block M_d with weight w.
  static AlgebraPtr full_matrix(int d, double w = 1.0) {
    return make({d}, {w});
  }
  // M_n(M): block dims n*d_b, same weights (tau_n convention).
  static AlgebraPtr amplified(const AlgebraPtr& base, int n);

  int block_count() const { return static_cast<int>(dims_.size()); }
  int dim(int b) const { return dims_[b]; }
  double weight(int b) const { return weights_[b]; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<double>& weights() const { return weights_; }

  // D = sum d_b: dimension of the direct-sum Hilbert space C^D.
  int total_dim() const { return total_dim_; }
  // D2 = sum d_b^2: dimension of the element space.
  int elem_dim() const { return elem_dim_; }

  // Index of the canonical basis element g_{(b,i,j)} = e^{(b)}_{ij}/sqrt(w_b)
  // in the coordinate vector (row-major within each block).
  int coord_index(int b, int i, int j) const {
    return vec_offsets_[b] + i * dims_[b] + j;
  }
  int vec_offset(int b) const { return vec_offsets_[b]; }
  // Offset of block b inside C^D.
  int dir_offset(int b) const { return dir_offsets_[b]; }

  // Index permutation realizing the involution X -> X* on coordinates:
  // (b,i,j) -> (b,j,i). Used by the tau-adjoint.
  const std::vector<int>& involution_permutation() const { return invol_; }

  bool same_structure(const BlockAlgebra& other) const {
    return dims_ == other.dims_ && weights_ == other.weights_;
  }

 private:
  std::vector<int> dims_;
  std::vector<double> weights_;
  std::vector<int> vec_offsets_;
  std::vector<int> dir_offsets_;
  std::vector<int> invol_;
  int total_dim_ = 0;
  int elem_dim_ = 0;
};

//============================================================================
// AlgebraElement — one complex matrix per block. Immutable after
// construction; all entries finite.
//============================================================================

class AlgebraElement {
 public:
  AlgebraElement(AlgebraPtr algebra, std::vector<Matrix> mats);

  static AlgebraElement zero(const AlgebraPtr& algebra);
  static AlgebraElement identity(const AlgebraPtr& algebra);
  // Element supported on a single block (zero elsewhere).
  static AlgebraElement from_block(const AlgebraPtr& algebra, int b,
                                   const Matrix& m);

  const AlgebraPtr& algebra() const { return alg_; }
  const Matrix& block(int b) const { return mats_[b]; }
  Matrix& block(int b) { return mats_[b]; }
  int block_count() const { return static_cast<int>(mats_.size()); }

  AlgebraElement adjoint() const;

  // Coordinates in the weighted-matrix-unit basis: x_{(b,i,j)} =
  // sqrt(w_b) (X_b)_{ij}. This basis is orthonormal for <X,Y> = tau(Y*X).
  Vector coords() const;
  static AlgebraElement from_coords(const AlgebraPtr& algebra,
                                    const Vector& coords);

  // Dense block-diagonal materialization in C^{D x D}.
  Matrix dense() const;
  // Apply as an operator on C^D.
  Vector apply_vec(const Vector& x) const;

  AlgebraElement& operator+=(const AlgebraElement& rhs);
  AlgebraElement& operator-=(const AlgebraElement& rhs);
  AlgebraElement& operator*=(complexd s);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) {
    a += b;
    return a;
  }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) {
    a -= b;
    return a;
  }
  friend AlgebraElement operator*(complexd s, AlgebraElement a) {
    a *= s;
    return a;
  }
  friend AlgebraElement operator*(const AlgebraElement& a,
                                  const AlgebraElement& b);

 private:
  AlgebraPtr alg_;
  std::vector<Matrix> mats_;
};

//============================================================================
// Trace, inner product, norms
//============================================================================

// tau(A) = sum_b w_b Tr(A_b).
complexd trace(const AlgebraElement& a);

// <X,Y> = tau(Y* X); the L^2(M,tau) inner product.
complexd l2_inner(const AlgebraElement& x, const AlgebraElement& y);
double l2_norm(const AlgebraElement& x);

// Operator norm: max over blocks of the largest singular value.
double op_norm(const AlgebraElement& a);

// Hermitian spectrum, ascending. Inputs with Hermiticity defect below `tol`
// are symmetrized; above it NotHermitian is thrown.
std::vector<double> spectrum_hermitian(const AlgebraElement& a,
                                       double tol_ = tol::algebraic);

// Full (complex) spectrum over all blocks, and its radius.
std::vector<complexd> spectrum(const AlgebraElement& a);
double spectral_radius(const AlgebraElement& a);

// Unique PSD square root; min eigenvalue >= -tol required.
AlgebraElement sqrt_psd(const AlgebraElement& a, double tol_ = 1e-10);

// Blockwise inverse; min singular value must exceed `tol` * max singular.
AlgebraElement invert(const AlgebraElement& a, double tol_ = 1e-12);

// A = U P with U unitary, P PSD; requires injective (here: invertible) A.
std::pair<AlgebraElement, AlgebraElement> polar(const AlgebraElement& a,
                                                double tol_ = 1e-12);

bool is_unitary(const AlgebraElement& a, double tol_ = tol::algebraic);
bool is_positive_el(const AlgebraElement& a, double tol_ = tol::algebraic);
bool commute(const AlgebraElement& a, const AlgebraElement& b,
             double tol_ = tol::algebraic);

//============================================================================
// Amplification M_n(M)
//============================================================================

// Element of M_n(M) from an n x n grid of elements of M (row-major grid).
AlgebraElement amp_embed(const AlgebraPtr& base, int n,
                         const std::vector<AlgebraElement>& grid);
// Extract grid entry (g,h) of an element of M_n(M) back into M.
AlgebraElement amp_entry(const AlgebraPtr& base, int n,
                         const AlgebraElement& amp_el, int g, int h);

// tau_n([A_{ij}]) = sum_k tau(A_kk), computed by extraction. The amplified
// algebra's own trace() must agree; keeping both paths separate is the point.
complexd amplification_trace(const AlgebraPtr& base, int n,
                             const AlgebraElement& amp_el);

//============================================================================
// TraceFunctional — a normal functional X -> tau(Z X). In finite dimensions
// Psi_tau: Z -> l_Z is a bijection onto the dual, so every functional has
// this form; the vector state <X x, x> is represented by Z_b = x_b x_b^*/w_b.
//============================================================================

class TraceFunctional {
 public:
  TraceFunctional(AlgebraPtr algebra, AlgebraElement rep);

  static TraceFunctional vector_state(const AlgebraPtr& algebra,
                                      const Vector& x);

  const AlgebraElement& representative() const { return rep_; }
  complexd operator()(const AlgebraElement& x) const;

 private:
  AlgebraPtr alg_;
  AlgebraElement rep_;
};

}  // namespace finvn

#endif
