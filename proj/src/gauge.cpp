#include "finvn/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace finvn {

//============================================================================
// Gauge
//============================================================================

Gauge Gauge::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    fail(errc::not_a_gauge, "constant gauge needs a positive finite value");
  Gauge g;
  g.kind_ = Kind::constant;
  g.value_ = value;
  std::ostringstream os;
  os << "constant(" << value << ")";
  g.label_ = os.str();
  return g;
}

Gauge Gauge::geometric(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    fail(errc::not_a_gauge, "geometric gauge needs a positive finite ratio");
  Gauge g;
  g.kind_ = Kind::geometric;
  g.ratio_ = c;
  std::ostringstream os;
  os << "geometric(" << c << ")";
  g.label_ = os.str();
  return g;
}

Gauge Gauge::poly(int k) {
  if (k < 0) fail(errc::not_a_gauge, "poly gauge needs degree >= 0");
  Gauge g;
  g.kind_ = Kind::poly;
  g.degree_ = k;
  std::ostringstream os;
  os << "poly(" << k << ")";
  g.label_ = os.str();
  return g;
}

Gauge Gauge::custom(std::vector<double> values) {
  if (values.empty())
    fail(errc::not_a_gauge, "custom gauge needs at least one value");
  Gauge g;
  g.kind_ = Kind::custom;
  g.log_values_.reserve(values.size());
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v))
      fail(errc::not_a_gauge, "custom gauge values must be finite and > 0");
    g.log_values_.push_back(std::log(v));
  }
  g.label_ = "custom";
  return g;
}

Gauge Gauge::custom_log(std::vector<double> log_values) {
  if (log_values.empty())
    fail(errc::not_a_gauge, "custom gauge needs at least one value");
  for (double v : log_values)
    if (!std::isfinite(v))
      fail(errc::not_a_gauge, "custom gauge log-values must be finite");
  Gauge g;
  g.kind_ = Kind::custom_log;
  g.log_values_ = std::move(log_values);
  g.label_ = "custom-log";
  return g;
}

double Gauge::log_at(std::int64_t n) const {
  if (n < 0) fail(errc::not_a_gauge, "gauge index must be >= 0");
  switch (kind_) {
    case Kind::constant:
      return std::log(value_);
    case Kind::geometric:
      return static_cast<double>(n) * std::log(ratio_);
    case Kind::poly:
      return degree_ * std::log(static_cast<double>(n) + 1.0);
    case Kind::custom:
    case Kind::custom_log:
      if (n >= static_cast<std::int64_t>(log_values_.size()))
        fail(errc::horizon_too_short, "custom gauge queried past its horizon");
      return log_values_[static_cast<std::size_t>(n)];
  }
  return 0.0;
}

std::int64_t Gauge::horizon() const {
  if (kind_ == Kind::custom || kind_ == Kind::custom_log)
    return static_cast<std::int64_t>(log_values_.size()) - 1;
  return std::numeric_limits<std::int64_t>::max();
}

//============================================================================
// Almost limits
//============================================================================

namespace {

// Window means A(n,k) for all admissible k at a fixed window size n, via a
// prefix-sum pass.
struct WindowScan {
  double mean_of_means;
  double min_mean;
  double max_mean;
};

WindowScan scan_windows(const std::vector<double>& prefix, std::int64_t n) {
  // prefix[i] = u_0 + ... + u_{i-1}. Window starting at k covers k..k+n.
  const std::int64_t N = static_cast<std::int64_t>(prefix.size()) - 1;
  const std::int64_t kmax = N - 1 - n;  // last admissible start
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double acc = 0.0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const double m = (prefix[k + n + 1] - prefix[k]) / static_cast<double>(n + 1);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    acc += m;
  }
  return {acc / static_cast<double>(kmax + 1), lo, hi};
}

std::vector<double> prefix_sums(const std::vector<double>& u) {
  std::vector<double> p(u.size() + 1, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) p[i + 1] = p[i] + u[i];
  return p;
}

}  // namespace

AlmostLimitResult almost_limit(const std::vector<double>& u, double tol) {
  const std::int64_t N = static_cast<std::int64_t>(u.size());
  if (N < 64)
    fail(errc::horizon_too_short,
         "almost_limit needs at least 64 samples, got " + std::to_string(N));
  for (double v : u)
    if (!std::isfinite(v))
      fail(errc::bad_config, "almost_limit: non-finite sample");

  const std::vector<double> prefix = prefix_sums(u);

  AlmostLimitResult res;
  double prev_estimate = std::numeric_limits<double>::quiet_NaN();
  // Window sizes double from 16 up to N/4 so every window slides over at
  // least 3N/4 distinct shifts.
  for (std::int64_t n = 16; n <= N / 4; n *= 2) {
    const WindowScan ws = scan_windows(prefix, n);
    res.step_delta = std::isnan(prev_estimate)
                         ? std::numeric_limits<double>::infinity()
                         : std::abs(ws.mean_of_means - prev_estimate);
    prev_estimate = ws.mean_of_means;
    res.estimate = ws.mean_of_means;
    res.spread = ws.max_mean - ws.min_mean;
    res.window = n;
  }
  res.converged = res.spread <= tol && res.step_delta <= tol;
  return res;
}

double strong_almost_limit(const std::vector<double>& u, double tol) {
  AlmostLimitResult res = almost_limit(u, tol);
  if (!res.converged) {
    std::ostringstream os;
    os << "window spread " << res.spread << " and step delta " << res.step_delta
       << " at window " << res.window << " exceed tolerance " << tol;
    fail(errc::not_almost_convergent, os.str());
  }
  return res.estimate;
}

//============================================================================
// Gauge analytics
//============================================================================

GaugeAnalysis analyze_gauge(const Gauge& p, std::int64_t horizon, double tol) {
  GaugeAnalysis out;
  out.horizon = std::min(horizon, p.horizon());
  if (out.horizon < 65)
    fail(errc::horizon_too_short, "gauge analysis needs a horizon of at least 65");

  // Ratio sequence r(n) = p(n+1)/p(n) in the log domain.
  const std::int64_t N = out.horizon;
  std::vector<double> ratio(static_cast<std::size_t>(N));
  for (std::int64_t n = 0; n < N; ++n) {
    const double lr = p.log_at(n + 1) - p.log_at(n);
    if (!std::isfinite(lr)) fail(errc::not_a_gauge, "non-finite gauge ratio");
    ratio[static_cast<std::size_t>(n)] = std::exp(lr);
  }
  out.valid = true;

  AlmostLimitResult growth = almost_limit(ratio, tol);
  if (!growth.converged) {
    std::ostringstream os;
    os << "ratio p(n+1)/p(n) is not almost convergent (spread " << growth.spread
       << " at window " << growth.window << ")";
    fail(errc::not_a_gauge, os.str());
  }
  out.growth = growth.estimate;
  out.growth_spread = growth.spread;

  // Regularity: c^n / p(n) must almost-converge to 1. Work with
  // exp(n log c - log p(n)); for regular gauges the exponent stays small.
  std::vector<double> reg(static_cast<std::size_t>(N + 1));
  std::vector<double> reg2(static_cast<std::size_t>(N + 1));
  const double logc = std::log(out.growth);
  bool finite = true;
  for (std::int64_t n = 0; n <= N; ++n) {
    const double e = static_cast<double>(n) * logc - p.log_at(n);
    if (e > 350.0) {
      finite = false;
      break;
    }
    reg[static_cast<std::size_t>(n)] = std::exp(e);
    reg2[static_cast<std::size_t>(n)] = std::exp(2.0 * e);
  }
  if (finite) {
    AlmostLimitResult rl = almost_limit(reg, tol);
    out.gamma_converged = rl.converged;
    out.gamma = rl.estimate;
    out.regularity_defect =
        rl.converged ? std::abs(rl.estimate - 1.0)
                     : std::numeric_limits<double>::infinity();
    out.regular = rl.converged && out.regularity_defect <= tol;
    AlmostLimitResult rl2 = almost_limit(reg2, tol);
    out.rho_converged = rl2.converged;
    out.rho = rl2.estimate;
  } else {
    out.regularity_defect = std::numeric_limits<double>::infinity();
    out.regular = false;
  }

  // Cross-check against inf_n p(n)^{1/n}.
  double root = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= N; ++n)
    root = std::min(root, std::exp(p.log_at(n) / static_cast<double>(n)));
  out.root_growth = root;
  out.root_gap_warning =
      std::abs(out.root_growth - out.growth) > 0.05 * std::max(out.growth, 1e-12);
  return out;
}

//============================================================================
// Domination
//============================================================================

DominationReport check_domination(const std::vector<double>& log_orbit,
                                  const Gauge& p, bool strict,
                                  double strict_slack) {
  const std::int64_t N = static_cast<std::int64_t>(log_orbit.size()) - 1;
  if (N < 16)
    fail(errc::horizon_too_short, "domination check needs at least 16 powers");
  if (p.horizon() < N)
    fail(errc::horizon_too_short, "gauge horizon shorter than the orbit");

  DominationReport rep;
  rep.strict = strict;
  double head_max = -std::numeric_limits<double>::infinity();
  double tail_max = head_max;
  double max_log_ratio = head_max;
  const double log_slack = std::log1p(strict_slack);
  bool strict_ok = true;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double lr = log_orbit[static_cast<std::size_t>(n)] - p.log_at(n);
    if (lr > max_log_ratio) {
      max_log_ratio = lr;
      rep.worst_n = n;
    }
    if (n <= N / 2)
      head_max = std::max(head_max, lr);
    else
      tail_max = std::max(tail_max, lr);
    if (lr > log_slack) strict_ok = false;
  }
  rep.max_ratio = std::exp(max_log_ratio);
  rep.tail_head_ratio = std::exp(tail_max - head_max);

  if (strict) {
    rep.dominated = strict_ok;
  } else {
    // Bounded mode: ratio must not keep growing into the tail, and must not
    // be absurdly large in absolute terms.
    const bool growing = rep.tail_head_ratio > 1.25;
    const bool huge = max_log_ratio > std::log(1e12);
    rep.dominated = !growing && !huge;
  }
  return rep;
}

//============================================================================
// q' and q~
//============================================================================

namespace {

// min over tail shifts k in [N/2, N - 1 - max(S)] of the subset mean.
double eval_subset(const std::vector<double>& u,
                   const std::vector<std::int64_t>& subset) {
  const std::int64_t N = static_cast<std::int64_t>(u.size());
  const std::int64_t top = subset.back();
  const std::int64_t k_lo = N / 2;
  const std::int64_t k_hi = N - 1 - top;
  if (k_hi < k_lo) return -std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(subset.size());
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    double s = 0.0;
    for (std::int64_t n : subset) s += u[static_cast<std::size_t>(n + k)];
    best = std::min(best, s / m);
  }
  return best;
}

}  // namespace

QPrimeResult q_prime(const std::vector<double>& u, int subset_budget) {
  const std::int64_t N = static_cast<std::int64_t>(u.size());
  if (N < 64)
    fail(errc::horizon_too_short, "q_prime needs at least 64 samples");
  for (double v : u)
    if (!std::isfinite(v)) fail(errc::bad_config, "q_prime: non-finite sample");

  QPrimeResult res;
  res.value = -std::numeric_limits<double>::infinity();
  std::set<std::vector<std::int64_t>> seen;
  const std::int64_t max_elem = N / 4;  // keep a long tail of shifts

  auto try_subset = [&](std::vector<std::int64_t> s) {
    if (s.empty() || res.subsets_tried >= subset_budget) return;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.back() > max_elem || s.front() < 0) return;
    if (!seen.insert(s).second) return;
    ++res.subsets_tried;
    const double v = eval_subset(u, s);
    if (v > res.value) {
      res.value = v;
      res.witness = s;
    }
  };

  // Singletons at a few scales.
  for (std::int64_t n : {std::int64_t(0), std::int64_t(1), std::int64_t(2),
                         std::int64_t(3), std::int64_t(5), std::int64_t(8)})
    try_subset({n});

  // Contiguous blocks {1..m}: these make q' >= the plain almost limit, which
  // property tests rely on.
  for (std::int64_t m = 2; m <= std::min<std::int64_t>(max_elem, 64); m *= 2) {
    std::vector<std::int64_t> s(static_cast<std::size_t>(m));
    std::iota(s.begin(), s.end(), 1);
    try_subset(std::move(s));
  }

  // Arithmetic progressions n_i = a + i*d.
  for (std::int64_t d = 2; d <= 8; ++d)
    for (std::int64_t len : {std::int64_t(4), std::int64_t(8), std::int64_t(16)}) {
      std::vector<std::int64_t> s;
      for (std::int64_t i = 0; i < len; ++i) s.push_back(1 + i * d);
      try_subset(std::move(s));
    }

  // Greedy augmentation of the current best witness.
  for (int round = 0; round < 4 && res.subsets_tried < subset_budget; ++round) {
    const std::vector<std::int64_t> base = res.witness;
    std::vector<std::int64_t> best_aug;
    double best_val = res.value;
    for (std::int64_t cand = 0; cand <= std::min<std::int64_t>(max_elem, 48);
         ++cand) {
      if (res.subsets_tried >= subset_budget) break;
      std::vector<std::int64_t> s = base;
      if (std::find(s.begin(), s.end(), cand) != s.end()) continue;
      s.push_back(cand);
      std::sort(s.begin(), s.end());
      if (s.back() > max_elem) continue;
      if (!seen.insert(s).second) continue;
      ++res.subsets_tried;
      const double v = eval_subset(u, s);
      if (v > best_val) {
        best_val = v;
        best_aug = s;
      }
    }
    if (best_aug.empty()) break;
    res.value = best_val;
    res.witness = best_aug;
  }
  return res;
}

double q_tilde(const std::vector<double>& u,
               const std::vector<std::int64_t>& shape, int subset_budget) {
  if (shape.empty() || shape.size() > 3)
    fail(errc::dimension_too_large,
         "q_tilde supports rank 1 to 3 multi-sequences");
  std::int64_t total = 1;
  for (std::int64_t e : shape) {
    if (e < 1) fail(errc::bad_config, "q_tilde: shape extents must be >= 1");
    total *= e;
  }
  if (total != static_cast<std::int64_t>(u.size()))
    fail(errc::shape_mismatch, "q_tilde: data does not match shape");

  if (shape.size() == 1) return q_prime(u, subset_budget).value;

  // Collapse the last axis by q_prime, then recurse.
  const std::int64_t inner = shape.back();
  const std::int64_t outer = total / inner;
  std::vector<double> collapsed(static_cast<std::size_t>(outer));
  for (std::int64_t o = 0; o < outer; ++o) {
    std::vector<double> row(
        u.begin() + static_cast<std::ptrdiff_t>(o * inner),
        u.begin() + static_cast<std::ptrdiff_t>((o + 1) * inner));
    collapsed[static_cast<std::size_t>(o)] = q_prime(row, subset_budget).value;
  }
  std::vector<std::int64_t> outer_shape(shape.begin(), shape.end() - 1);
  return q_tilde(collapsed, outer_shape, subset_budget);
}

}  // namespace finvn
