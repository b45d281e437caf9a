#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finvn/algebra.hpp"
#include "finvn/limits.hpp"
#include "finvn/supermap.hpp"

// Small built-in model families used by the `finvn demo` subcommand and the
// acceptance suite. Everything is generated from the truncation parameter
// (largest block size) and a seed, never loaded from fixture files.

namespace finvn::demos {

// Blocks M_2 .. M_P with trace weights 1/p^3. For each n the map
// phi_n(X) = <X_n e, e> P     (e the first basis vector of block n,
//                              P = I - ee* the complementary projection)
// has norm 1, while its trace adjoint  Y -> Tr(P Y_n) ee*  has norm n - 1:
// the adjoint family escapes every bound that holds for the original family.
struct AdjointNormGrowth {
  AlgebraPtr algebra;
  std::vector<int> n;                  // 2 .. P
  std::vector<SuperOperator> maps;     // phi_n
  std::vector<SuperOperator> adjoints; // computed trace adjoints
  std::vector<double> map_norm;        // == 1
  std::vector<double> adjoint_norm;    // == n - 1
  std::vector<double> predicted;       // n - 1
  std::vector<double> formula_defect;  // computed adjoint vs closed form
  std::vector<double> choi_min_map;    // CP certificates (all >= 0)
  std::vector<double> choi_min_adjoint;
};

AdjointNormGrowth adjoint_norm_growth(int max_block = 8);

// The same block structure under two different trace-weight families:
//   cubic   w_p = 1/p^3
//   spiked  w_p = p/2^p when p is a power of 3, else 1/2^p
// The map shifts every block one slot up, embedding X_p into the top-left
// corner of block p+1. Its trace adjoint scales corner restrictions by
// w_{p+1}/w_p, so ||adjoint|| = max_p w_{p+1}/w_p: the value depends on the
// weight family even though the map itself never changes.
struct TraceSensitivity {
  int max_block;
  AlgebraPtr alg_cubic;
  AlgebraPtr alg_spiked;
  SuperOperator shift_cubic;     // same abstract map, coordinates per trace
  SuperOperator shift_spiked;
  SuperOperator adjoint_cubic;
  SuperOperator adjoint_spiked;
  std::vector<double> weight_cubic;   // w_p, p = 2..P
  std::vector<double> weight_spiked;
  std::vector<double> ratio_cubic;    // w_{p+1}/w_p, p = 2..P-1
  std::vector<double> ratio_spiked;
  double shift_norm;                  // == 1 (either trace)
  double adjoint_norm_cubic;          // == 8/27 for P >= 3
  double adjoint_norm_spiked;         // == 3/2  for 3 <= P <= 8
  double formula_defect_cubic;        // computed adjoint vs closed form
  double formula_defect_spiked;
  std::string note;                   // finite-truncation caveat
};

TraceSensitivity trace_sensitivity(int max_block = 8);

// Seeded end-to-end run of the similarity pipeline on one generated
// operator S (r diag(e^{i theta})) S^{-1} with moderate conditioning.
struct SimilarityShowcase {
  AlgebraPtr algebra;
  AlgebraElement t;
  double radius;
  std::uint64_t seed;
  SimilarityReport report;
};

SimilarityShowcase similarity_showcase(std::uint64_t seed = 7, int dim = 6,
                                       double radius = 0.9);

}  // namespace finvn::demos
