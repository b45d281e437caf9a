#ifndef FINVN_SUPERMAP_HPP
#define FINVN_SUPERMAP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "finvn/algebra.hpp"

namespace finvn {

//============================================================================
// SuperOperator — a linear map phi: M -> M stored as its action matrix on
// the weighted-matrix-unit coordinates (elem_dim x elem_dim). Everything
// downstream (adjoints, Choi data, limits) works through this matrix.
//============================================================================

class SuperOperator {
 public:
  SuperOperator(AlgebraPtr algebra, Matrix action);

  static SuperOperator identity_map(const AlgebraPtr& algebra);
  static SuperOperator zero_map(const AlgebraPtr& algebra);
  // X -> A X B.
  static SuperOperator sandwich(const AlgebraElement& a,
                                const AlgebraElement& b);
  // X -> A* X A (the sandwich that shows up in orbit renormalization).
  static SuperOperator conjugation(const AlgebraElement& a) {
    return sandwich(a.adjoint(), a);
  }
  // Build the action matrix column by column from a callback.
  static SuperOperator from_function(
      const AlgebraPtr& algebra,
      const std::function<AlgebraElement(const AlgebraElement&)>& fn);

  const AlgebraPtr& algebra() const { return alg_; }
  const Matrix& action() const { return action_; }

  AlgebraElement apply(const AlgebraElement& x) const;
  AlgebraElement operator()(const AlgebraElement& x) const {
    return apply(x);
  }

  // this o inner (apply inner first).
  SuperOperator compose(const SuperOperator& inner) const;

  SuperOperator& operator+=(const SuperOperator& rhs);
  SuperOperator& operator-=(const SuperOperator& rhs);
  SuperOperator& operator*=(complexd s);
  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) {
    a += b;
    return a;
  }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) {
    a -= b;
    return a;
  }
  friend SuperOperator operator*(complexd s, SuperOperator a) {
    a *= s;
    return a;
  }

  // Norm of the action on L^2(M, tau): largest singular value.
  double l2_extension_norm() const;

 private:
  AlgebraPtr alg_;
  Matrix action_;
};

// Adjoint with respect to the bilinear trace pairing:
// tau(phi(X) Y) = tau(X phihat(Y)). On coordinates this is P S^T P with P
// the involution permutation (b,i,j) -> (b,j,i) and a plain transpose.
// It is an involution and reverses composition order.
SuperOperator tau_adjoint(const SuperOperator& phi);

// || hat(hat(phi)) - phi || in the entrywise max norm; 0 up to rounding.
double adjoint_involution_defect(const SuperOperator& phi);

// max entrywise defect of phi(X*) = phi(X)* over the coordinate basis.
double hermiticity_preservation_defect(const SuperOperator& phi);

bool is_unital(const SuperOperator& phi, double tol_ = tol::algebraic);
// tau o phi = tau, equivalently phihat(I) = I.
bool is_trace_preserving(const SuperOperator& phi,
                         double tol_ = tol::algebraic);

//============================================================================
// Complete positivity via Choi data. For each source block b the certificate
// matrix is C_b = sum_{ij} e_ij (x) phi(e^{(b)}_ij), a (d_b * D)-square
// matrix. phi is CP iff every C_b is PSD.
//============================================================================

struct CpCertificate {
  bool cp = false;
  double min_eig = 0.0;        // most negative eigenvalue over all blocks
  double herm_defect = 0.0;    // Choi Hermiticity defect (CP needs ~0)
  std::vector<double> block_min_eigs;
};

CpCertificate cp_certificate(const SuperOperator& phi,
                             double tol_ = tol::algebraic);

// id_n (x) phi as an explicit superoperator on the n-fold amplification.
// Guarded: the amplified coordinate space must stay materializable.
SuperOperator amplify(const SuperOperator& phi, int n);

// Apply id_n (x) phi entrywise without materializing the amplified action
// matrix. `x` lives in the n-fold amplification of phi's algebra.
AlgebraElement amplified_apply(const SuperOperator& phi, int n,
                               const AlgebraElement& x);

//============================================================================
// Positivity of id_n (x) phi. Three-way verdict:
//   positive      — Choi certificate is PSD (so phi is CP, hence n-positive
//                   for every n);
//   violated      — an explicit PSD input with a non-positive output was
//                   found (witness attached);
//   inconclusive  — Choi has negative eigenvalues but no violation at this
//                   amplification order was found (e.g. the transpose map at
//                   n = 1: positive but not 2-positive).
//============================================================================

enum class PositivityVerdict { positive, violated, inconclusive };

struct PositivityReport {
  PositivityVerdict verdict = PositivityVerdict::inconclusive;
  double choi_min_eig = 0.0;
  std::optional<AlgebraElement> witness;      // PSD input
  double witness_output_min_eig = 0.0;        // min eig of phi_n(witness)
  std::string note;
};

PositivityReport positivity_check(const SuperOperator& phi, int n = 1,
                                  double tol_ = tol::algebraic,
                                  std::uint64_t seed = 0x9e3779b97f4a7c15ull);

// ||phi|| = ||phi(I)||_op, valid for positive maps; requires a PSD Choi
// certificate and throws NotPSD otherwise.
double positive_map_norm(const SuperOperator& phi,
                         double tol_ = tol::algebraic);

}  // namespace finvn

#endif
