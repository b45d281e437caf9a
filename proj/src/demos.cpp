#include "finvn/demos.hpp"

#include <cmath>
#include <random>

namespace finvn::demos {

namespace {

AlgebraPtr block_tower(int max_block, const std::vector<double>& weights) {
  std::vector<int> dims;
  for (int p = 2; p <= max_block; ++p) dims.push_back(p);
  return BlockAlgebra::make(dims, weights);
}

bool power_of_three(int p) {
  while (p > 1 && p % 3 == 0) p /= 3;
  return p == 1;
}

double frob_defect(const SuperOperator& a, const SuperOperator& b) {
  return (a.action() - b.action()).norm();
}

}  // namespace

//============================================================================
// Norm growth of trace adjoints under a rank-collapsing family
//============================================================================

AdjointNormGrowth adjoint_norm_growth(int max_block) {
  if (max_block < 2)
    fail(errc::bad_config, "adjoint_norm_growth needs max_block >= 2");
  std::vector<double> weights;
  for (int p = 2; p <= max_block; ++p)
    weights.push_back(1.0 / (static_cast<double>(p) * p * p));
  AdjointNormGrowth out;
  out.algebra = block_tower(max_block, weights);

  for (int n = 2; n <= max_block; ++n) {
    const int bi = n - 2;  // block index of M_n
    SuperOperator phi = SuperOperator::from_function(
        out.algebra, [&](const AlgebraElement& x) {
          AlgebraElement y = AlgebraElement::zero(out.algebra);
          const complexd corner = x.block(bi)(0, 0);  // <X_n e, e>
          Matrix p = Matrix::Identity(n, n);
          p(0, 0) = 0.0;  // P = I - ee*
          y.block(bi) = corner * p;
          return y;
        });
    SuperOperator hat = tau_adjoint(phi);

    // Closed form of the adjoint: Y -> Tr(P Y_n) ee*.
    SuperOperator hat_closed = SuperOperator::from_function(
        out.algebra, [&](const AlgebraElement& y) {
          AlgebraElement z = AlgebraElement::zero(out.algebra);
          complexd tr = 0.0;
          for (int i = 1; i < n; ++i) tr += y.block(bi)(i, i);
          z.block(bi)(0, 0) = tr;
          return z;
        });

    // One Choi certificate per map; it both feeds the table and licenses
    // the ||phi(1)|| norm formula, which only holds for CP maps.
    const CpCertificate cmap = cp_certificate(phi);
    const CpCertificate cadj = cp_certificate(hat);
    if (!cmap.cp || !cadj.cp)
      fail(errc::not_psd, "corner evaluation map lost complete positivity");
    const AlgebraElement one = AlgebraElement::identity(out.algebra);

    out.n.push_back(n);
    out.map_norm.push_back(op_norm(phi(one)));
    out.adjoint_norm.push_back(op_norm(hat(one)));
    out.predicted.push_back(static_cast<double>(n) - 1.0);
    out.formula_defect.push_back(frob_defect(hat, hat_closed));
    out.choi_min_map.push_back(cmap.min_eig);
    out.choi_min_adjoint.push_back(cadj.min_eig);
    out.maps.push_back(std::move(phi));
    out.adjoints.push_back(std::move(hat));
  }
  return out;
}

//============================================================================
// Trace sensitivity of the adjoint norm under a block shift
//============================================================================

namespace {

SuperOperator block_shift(const AlgebraPtr& alg, int max_block) {
  // X_p lands in the top-left corner of block p+1; the top block drops out.
  return SuperOperator::from_function(alg, [&](const AlgebraElement& x) {
    AlgebraElement y = AlgebraElement::zero(alg);
    for (int p = 2; p < max_block; ++p) {
      const int src = p - 2, dst = p - 1;
      y.block(dst).topLeftCorner(p, p) = x.block(src);
    }
    return y;
  });
}

SuperOperator block_shift_adjoint_closed(const AlgebraPtr& alg,
                                         int max_block) {
  // Per block p: (w_{p+1}/w_p) times the top-left corner of block p+1.
  return SuperOperator::from_function(alg, [&](const AlgebraElement& y) {
    AlgebraElement z = AlgebraElement::zero(alg);
    for (int p = 2; p < max_block; ++p) {
      const int lo = p - 2, hi = p - 1;
      const double ratio = alg->weights()[hi] / alg->weights()[lo];
      z.block(lo) = ratio * y.block(hi).topLeftCorner(p, p);
    }
    return z;
  });
}

}  // namespace

TraceSensitivity trace_sensitivity(int max_block) {
  if (max_block < 3)
    fail(errc::bad_config, "trace_sensitivity needs max_block >= 3");
  std::vector<double> wc, ws;
  for (int p = 2; p <= max_block; ++p) {
    wc.push_back(1.0 / (static_cast<double>(p) * p * p));
    const double base = std::pow(2.0, -static_cast<double>(p));
    ws.push_back(power_of_three(p) ? p * base : base);
  }
  AlgebraPtr ac = block_tower(max_block, wc);
  AlgebraPtr as = block_tower(max_block, ws);

  SuperOperator shift_c = block_shift(ac, max_block);
  SuperOperator shift_s = block_shift(as, max_block);
  SuperOperator adj_c = tau_adjoint(shift_c);
  SuperOperator adj_s = tau_adjoint(shift_s);
  const double defect_c =
      frob_defect(adj_c, block_shift_adjoint_closed(ac, max_block));
  const double defect_s =
      frob_defect(adj_s, block_shift_adjoint_closed(as, max_block));

  std::vector<double> rc, rs;
  for (int p = 2; p < max_block; ++p) {
    rc.push_back(wc[p - 1] / wc[p - 2]);
    rs.push_back(ws[p - 1] / ws[p - 2]);
  }
  const double shift_norm = positive_map_norm(shift_c);
  const double adj_norm_c = positive_map_norm(adj_c);
  const double adj_norm_s = positive_map_norm(adj_s);
  return TraceSensitivity{
      max_block,
      std::move(ac),
      std::move(as),
      std::move(shift_c),
      std::move(shift_s),
      std::move(adj_c),
      std::move(adj_s),
      std::move(wc),
      std::move(ws),
      std::move(rc),
      std::move(rs),
      shift_norm,
      adj_norm_c,
      adj_norm_s,
      defect_c,
      defect_s,
      "In a finite truncation every linear map has a bounded trace adjoint "
      "for every faithful trace; whether the adjoint family stays uniformly "
      "bounded as the tower grows depends on the weight ratios w_{p+1}/w_p "
      "shown in the table, and only the full infinite tower separates the "
      "two weight families."};
}

//============================================================================
// End-to-end similarity showcase
//============================================================================

SimilarityShowcase similarity_showcase(std::uint64_t seed, int dim,
                                       double radius) {
  if (dim < 2 || dim > 32)
    fail(errc::bad_config, "similarity_showcase supports dims 2..32");
  if (!(radius > 0.0))
    fail(errc::bad_config, "similarity_showcase needs a positive radius");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  // Conditioned similarity frame: random unitaries around logspaced
  // singular values with condition number 10.
  Matrix a(dim, dim), b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      a(i, j) = complexd(g(rng), g(rng));
      b(i, j) = complexd(g(rng), g(rng));
    }
  Eigen::HouseholderQR<Matrix> qa(a), qb(b);
  Matrix ua = qa.householderQ(), ub = qb.householderQ();
  Vector sv(dim);
  for (int i = 0; i < dim; ++i)
    sv(i) = std::pow(10.0, -static_cast<double>(i) / (dim - 1));
  Matrix s = ua * sv.asDiagonal() * ub;

  // Well-separated phases, first one pinned at zero.
  Matrix d = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double theta =
        i == 0 ? 0.0
               : 2.0 * M_PI * (static_cast<double>(i) + 0.25 * uni(rng)) / dim;
    d(i, i) = radius * std::exp(complexd(0.0, theta));
  }

  AlgebraPtr alg = BlockAlgebra::full_matrix(dim);
  AlgebraElement t(alg, {s * d * s.inverse()});
  SimilarityReport report = similarity({t}, {Gauge::geometric(radius)});
  return SimilarityShowcase{std::move(alg), std::move(t), radius, seed,
                            std::move(report)};
}

}  // namespace finvn::demos
