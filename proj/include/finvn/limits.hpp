#ifndef FINVN_LIMITS_HPP
#define FINVN_LIMITS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finvn/algebra.hpp"
#include "finvn/gauge.hpp"
#include "finvn/supermap.hpp"

namespace finvn {

struct LimitOptions {
  std::int64_t horizon = 2048;
  double tol = 1e-6;        // iterative tolerance (window certificates)
  double gauge_tol = 1e-2;  // gauge classification tolerance
  double compat_tol = 1e-8; // orbit/gauge ratio must exceed this
  bool allow_nonregular = false;  // downgrade NotRegularGauge to diagnostics
  bool strict_domination = false; // require ||T^n|| <= p(n) pointwise
  int probes = 4;                 // window-certificate sample elements
  std::uint64_t seed = 0xc0ffee;
};

//============================================================================
// Fixed-space projection of a power-bounded matrix: the almost limit of S^n
// equals the spectral projection onto ker(S - I). Computed two ways and
// cross-checked:
//   1. Cesaro doubling (convex combinations of powers, unconditionally
//      stable) followed by repeated squaring of the mean, which squares the
//      distance to the projection at every step.
//   2. An eigendecomposition-based projection when S is numerically
//      diagonalizable.
// The candidate with the smaller combined residual wins.
//============================================================================

struct ProjectionStats {
  double residual_idempotent = 0.0;  // ||E^2 - E||_F
  double residual_intertwine = 0.0;  // max(||SE - E||_F, ||ES - E||_F)
  double trace_defect = 0.0;         // |tr E - round(tr E)|
  int rank = 0;                      // round(tr E)
  int eig_count = -1;                // eigenvalues of S within the 1-window
  int iterations = 0;                // squaring steps taken
  bool used_eigen_path = false;
  double final_delta = 0.0;          // last squaring increment
};

Matrix fixed_space_projection(const Matrix& s, ProjectionStats* stats,
                              double fix_window = 1e-6);

//============================================================================
// Orbit limits E(X) = almost-lim T*^n X T^n / p(n)^2.
//
// Gate order: the gauge must classify as regular (else NotRegularGauge,
// unless allow_nonregular), the orbit must be dominated by the gauge (else
// NotDominated), and the ratio ||T^n|| / p(n) must not vanish (else
// NotCompatible). The value is then the fixed-space projection of
// X -> T* X T / c^2 and is certified by algebraic residuals, a fixed-rank
// cross-check, and window diagnostics driven by the exact recurrence
// M_{n+1} = (p(n)/p(n+1))^2 T* M_n T.
//============================================================================

struct WindowCertificate {
  double defect = 0.0;       // max over probes/shifts at the largest window
  double trend = 0.0;        // defect(n) / defect(n/2); ~0.5 for 1/n decay
  std::int64_t window = 0;
  bool certified = false;    // residuals + rank + (defect small or trending)
};

struct OrbitLimit {
  SuperOperator value;       // E as a superoperator
  double growth = 0.0;       // c_p
  double rho = 0.0;          // almost limit of (c^n / p(n))^2
  GaugeAnalysis gauge;
  DominationReport domination;
  double compat_value = 0.0; // almost limit (or q' bound) of ||T^n|| / p(n)
  bool compat_via_qprime = false;
  ProjectionStats projection;
  WindowCertificate window;
  bool diagnostics_only = false;  // non-regular override path
};

OrbitLimit orbit_limit(const AlgebraElement& t, const Gauge& p,
                       const LimitOptions& opts = {});

// One-sided variant for a superoperator power sequence psi^n / p(n). The
// domination gate uses the L^2 action-matrix norms as the size surrogate.
OrbitLimit power_sequence_limit(const SuperOperator& psi, const Gauge& p,
                                const LimitOptions& opts = {});

// log ||T^n||_op for n = 0..horizon, computed with per-step rescaling.
std::vector<double> log_orbit_norms(const AlgebraElement& t,
                                    std::int64_t horizon);

//============================================================================
// Structural laws of the orbit limit, each verified on seeded probes:
//   cp         E has a PSD Choi certificate
//   shift-in   E(T* X T) = c^2 E(X)
//   commutant  E(A* X B) = A* E(X) B for A, B polynomials in T
//   shift-out  T* E(X) T = c^2 E(X)
//   iterate    E(E(X)) = rho E(X)
//============================================================================

struct LawReport {
  std::string name;
  double defect = 0.0;
  bool pass = false;
};

std::vector<LawReport> verify_orbit_laws(const AlgebraElement& t,
                                         const OrbitLimit& lim,
                                         double tol_ = 1e-7,
                                         std::uint64_t seed = 0xc0ffee,
                                         int probes = 5);

// || hat(E_T) - E_{T*} ||: the trace adjoint transports the orbit limit of T
// to the orbit limit of T*.
double hat_transport_defect(const OrbitLimit& lim_t,
                            const OrbitLimit& lim_tstar);

//============================================================================
// Net limit over the abelian semigroup generated by commuting idempotents
// (the orbit limits of a commuting family). The net of finite products
// stabilizes on the composition of all generators.
//============================================================================

struct SemigroupLimitResult {
  SuperOperator limit;
  double commutation_defect = 0.0;  // max pairwise generator defect
  double idempotent_residual = 0.0;
  double absorption_defect = 0.0;   // max_i ||F E_i - F||, ||E_i F - F||
  CpCertificate cp;
  int iterations = 0;
};

SemigroupLimitResult semigroup_limit(const std::vector<SuperOperator>& family,
                                     double tol_ = 1e-9);

//============================================================================
// Joint similarity pipeline for a commuting family T_1..T_k with gauges
// p_1..p_k: compute the orbit limits, their semigroup limit F, require
// F(1) > 0 (else NotC1 with a nullspace witness), set A = F(1)^{1/2}, and
// return the commuting unitaries U_i = A T_i A^{-1} / c_i together with the
// similarity quality matrix R = A hat(F)(1) A, whose spectrum is >= 1.
//============================================================================

struct SimilarityReport {
  bool success = false;
  errc code = errc::bad_config;  // meaningful when !success
  std::string message;
  std::vector<double> growths;   // c_i
  std::vector<OrbitLimit> limits;
  std::optional<SemigroupLimitResult> joint;
  std::optional<AlgebraElement> fixed_identity;  // F(1)
  std::optional<AlgebraElement> similarity_root; // A
  std::vector<AlgebraElement> unitaries;
  double max_unitarity_defect = 0.0;
  double max_commutation_defect = 0.0;
  std::vector<double> r_spectrum;
  double r_min = 0.0;
  std::optional<Vector> nullspace_witness;  // when F(1) is singular
};

SimilarityReport similarity(const std::vector<AlgebraElement>& family,
                            const std::vector<Gauge>& gauges,
                            const LimitOptions& opts = {});

// Gauges chosen per member as geometric(spectral_radius(T_i)).
SimilarityReport similarity_auto(const std::vector<AlgebraElement>& family,
                                 const LimitOptions& opts = {});

// Operator form of the pipeline: returns the report on success and throws
// the report's error code on failure.
SimilarityReport intertwine_unitaries(const std::vector<AlgebraElement>& family,
                                      const std::vector<Gauge>& gauges,
                                      const LimitOptions& opts = {});

//============================================================================
// Asymptotic control report: everything the gauge says about an orbit,
// without computing the limit. Used by diagnostics and the CLI.
//============================================================================

struct AsymptoticControlReport {
  GaugeAnalysis gauge;
  DominationReport strict_domination;
  DominationReport bounded_domination;
  AlmostLimitResult ratio_almost;  // of ||T^n|| / p(n)
  QPrimeResult ratio_qprime;
  bool compatible = false;
  double gamma = 0.0;  // almost limit of c^n / p(n)
  double rho = 0.0;    // almost limit of (c^n / p(n))^2
};

AsymptoticControlReport asymptotic_control_report(const AlgebraElement& t,
                                                  const Gauge& p,
                                                  const LimitOptions& opts = {});

}  // namespace finvn

#endif
