#ifndef FINVN_GAUGE_HPP
#define FINVN_GAUGE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finvn/error.hpp"

namespace finvn {

//============================================================================
// Gauge — a positive sequence p(0), p(1), ... used to renormalize operator
// orbits. Values are kept in the log domain so geometric growth up to huge
// horizons never overflows.
//============================================================================

class Gauge {
 public:
  enum class Kind { constant, geometric, poly, custom, custom_log };

  static Gauge constant(double value = 1.0);
  static Gauge geometric(double c);
  // p(n) = (n+1)^k.
  static Gauge poly(int k);
  static Gauge custom(std::vector<double> values);
  // Values given as log p(n); the only way to express growing tabulated
  // gauges (c^n overflows double long before typical horizons).
  static Gauge custom_log(std::vector<double> log_values);

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }

  // log p(n). For custom gauges n must be inside the stored horizon.
  double log_at(std::int64_t n) const;
  // p(n); may overflow to inf for large n, callers wanting safety use log_at.
  double at(std::int64_t n) const { return std::exp(log_at(n)); }

  // Largest n for which log_at(n) is defined (unbounded for closed forms).
  std::int64_t horizon() const;

  // Parameters (meaningful per kind).
  double ratio() const { return ratio_; }  // geometric c
  int degree() const { return degree_; }   // poly k

 private:
  Gauge() = default;
  Kind kind_ = Kind::constant;
  std::string label_;
  double value_ = 1.0;
  double ratio_ = 1.0;
  int degree_ = 0;
  std::vector<double> log_values_;
};

//============================================================================
// Almost convergence along shifted Cesaro windows.
//
// A(n,k) = (1/(n+1)) sum_{i=k}^{k+n} u_i. The sequence almost-converges to L
// iff A(n,k) -> L uniformly in k. We probe windows n = 16, 32, ..., N/4 and
// measure the spread over all admissible shifts k at each window size.
//============================================================================

struct AlmostLimitResult {
  bool converged = false;
  double estimate = 0.0;  // mean over shifts at the largest window
  double spread = 0.0;    // max_k - min_k of the window mean at n_max
  double step_delta = 0.0;  // |estimate change| across the last window doubling
  std::int64_t window = 0;  // largest window size used
};

// Diagnostic form: never throws on non-convergence, only on a short horizon
// (need at least 64 samples) or bad input.
AlmostLimitResult almost_limit(const std::vector<double>& u, double tol = 1e-6);

// Strict form: returns the limit or throws NotAlmostConvergent.
double strong_almost_limit(const std::vector<double>& u, double tol = 1e-6);

//============================================================================
// Gauge analytics
//============================================================================

struct GaugeAnalysis {
  bool valid = false;       // positive, finite, p(0) > 0
  bool regular = false;     // c_p^n / p(n) almost-converges to 1
  double growth = 0.0;      // c_p: almost limit of p(n+1)/p(n)
  double growth_spread = 0.0;
  double regularity_defect = 0.0;  // |gamma - 1|
  double gamma = 0.0;       // almost limit of c^n / p(n), when it exists
  double rho = 0.0;         // almost limit of (c^n / p(n))^2
  bool gamma_converged = false;
  bool rho_converged = false;
  double root_growth = 0.0;  // inf_n p(n)^{1/n} cross-check
  bool root_gap_warning = false;  // growth vs root estimate disagree > 5%
  std::int64_t horizon = 0;
};

// Classify a gauge over `horizon` samples. Throws NotAGauge when the ratio
// sequence p(n+1)/p(n) fails to almost-converge at tolerance `tol`.
GaugeAnalysis analyze_gauge(const Gauge& p, std::int64_t horizon = 4096,
                            double tol = 1e-2);

//============================================================================
// Domination of an orbit by a gauge.
//
// Strict mode asks for ||T^n|| <= p(n) (1 + 1e-9) at every sampled n.
// Bounded mode asks only that sup_n ||T^n|| / p(n) stays bounded: the tail
// maximum of the ratio over (N/2, N] must not exceed ~1.25x the head maximum
// over [1, N/2], and an absolute cap guards against slow blowup.
//============================================================================

struct DominationReport {
  bool dominated = false;
  bool strict = false;            // which mode produced `dominated`
  double max_ratio = 0.0;         // sup_n ||T^n|| / p(n) over the horizon
  double tail_head_ratio = 0.0;   // growth detector statistic
  std::int64_t worst_n = 0;       // argmax of the ratio
};

// log_orbit[n] = log ||T^n||, n = 0..N (computed by the caller with per-step
// rescaling so it never overflows).
DominationReport check_domination(const std::vector<double>& log_orbit,
                                  const Gauge& p, bool strict,
                                  double strict_slack = 1e-9);

//============================================================================
// q'(u): certified lower bound for the subset functional
//
//   q'(u) = sup over finite subsets S = {n_1 < ... < n_m} of
//           liminf_k (1/m) sum_i u(n_i + k).
//
// Evaluated over a deterministic schedule of subsets (singletons, contiguous
// blocks, arithmetic progressions, then greedy augmentation) with the liminf
// replaced by the minimum over tail shifts k in [N/2, N - max(S)]. The
// result is a certified lower bound for the N-sample proxy of q'.
//============================================================================

struct QPrimeResult {
  double value = 0.0;
  std::vector<std::int64_t> witness;  // subset achieving the bound
  int subsets_tried = 0;
};

QPrimeResult q_prime(const std::vector<double>& u, int subset_budget = 200);

// Multi-index version: applies q_prime along the last axis recursively.
// `shape` gives the extents; `u` is row-major over the multi-index. Rank
// above 3 is refused (DimensionTooLarge).
double q_tilde(const std::vector<double>& u,
               const std::vector<std::int64_t>& shape, int subset_budget = 200);

}  // namespace finvn

#endif
