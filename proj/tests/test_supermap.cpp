#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "finvn/supermap.hpp"
#include "oracles.hpp"

using namespace finvn;

namespace {

AlgebraPtr two_block() {
  return BlockAlgebra::make({2, 3}, {1.0 / 8.0, 1.0 / 27.0});
}

AlgebraElement random_el(const AlgebraPtr& alg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> mats;
  for (int b = 0; b < alg->block_count(); ++b) {
    Matrix m(alg->dim(b), alg->dim(b));
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) m(i, j) = complexd(g(rng), g(rng));
    mats.push_back(m);
  }
  return AlgebraElement(alg, mats);
}

SuperOperator transpose_map(const AlgebraPtr& alg) {
  return SuperOperator::from_function(alg, [&](const AlgebraElement& x) {
    std::vector<Matrix> mats;
    for (int b = 0; b < x.block_count(); ++b)
      mats.push_back(x.block(b).transpose());
    return AlgebraElement(alg, mats);
  });
}

}  // namespace

TEST_CASE("sandwich action matches direct multiplication") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 1);
  AlgebraElement b = random_el(alg, 2);
  AlgebraElement x = random_el(alg, 3);
  SuperOperator phi = SuperOperator::sandwich(a, b);
  CHECK(l2_norm(phi(x) - a * x * b) < 1e-12);
  // from_function reproduces the same action matrix.
  SuperOperator phi2 = SuperOperator::from_function(
      alg, [&](const AlgebraElement& y) { return a * y * b; });
  CHECK((phi.action() - phi2.action()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace adjoint satisfies the bilinear pairing identity") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 4);
  AlgebraElement b = random_el(alg, 5);
  SuperOperator phi = SuperOperator::sandwich(a, b);
  SuperOperator hat = tau_adjoint(phi);
  for (std::uint64_t s = 10; s < 16; ++s) {
    AlgebraElement x = random_el(alg, s);
    AlgebraElement y = random_el(alg, s + 100);
    const complexd lhs = trace(phi(x) * y);
    const complexd rhs = trace(x * hat(y));
    CHECK(std::abs(lhs - rhs) < 1e-11);
  }
  // Sandwich closed form: hat of X -> A X B is Y -> B Y A.
  SuperOperator expect = SuperOperator::sandwich(b, a);
  CHECK((hat.action() - expect.action()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace adjoint is an involution and reverses composition") {
  AlgebraPtr alg = two_block();
  SuperOperator phi1 =
      SuperOperator::sandwich(random_el(alg, 21), random_el(alg, 22));
  SuperOperator phi2 =
      SuperOperator::sandwich(random_el(alg, 23), random_el(alg, 24));
  CHECK(adjoint_involution_defect(phi1) == 0.0);  // exact permutation algebra
  // (phi1 o phi2)^ = phi2^ o phi1^: the pairing flips the order.
  SuperOperator lhs = tau_adjoint(phi1.compose(phi2));
  SuperOperator rhs = tau_adjoint(phi2).compose(tau_adjoint(phi1));
  CHECK((lhs.action() - rhs.action()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("trace adjoint preserves the L2 extension norm") {
  AlgebraPtr alg = two_block();
  SuperOperator phi =
      SuperOperator::sandwich(random_el(alg, 31), random_el(alg, 32));
  CHECK(phi.l2_extension_norm() ==
        doctest::Approx(tau_adjoint(phi).l2_extension_norm()).epsilon(1e-10));
}

TEST_CASE("hermiticity preservation detector") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 41);
  // X -> A* X A preserves adjoints; X -> A X A does not (generically).
  CHECK(hermiticity_preservation_defect(
            SuperOperator::sandwich(a.adjoint(), a)) < 1e-12);
  CHECK(hermiticity_preservation_defect(SuperOperator::sandwich(a, a)) >
        1e-3);
}

TEST_CASE("unital and trace preserving predicates") {
  AlgebraPtr alg = two_block();
  SuperOperator id = SuperOperator::identity_map(alg);
  CHECK(is_unital(id));
  CHECK(is_trace_preserving(id));
  AlgebraElement a = random_el(alg, 51);
  SuperOperator conj = SuperOperator::sandwich(a.adjoint(), a);
  CHECK_FALSE(is_unital(conj));
  // A unitary conjugation is unital and trace preserving.
  auto [u, p] = polar(a);
  SuperOperator uconj = SuperOperator::sandwich(u.adjoint(), u);
  CHECK(is_unital(uconj));
  CHECK(is_trace_preserving(uconj));
}

TEST_CASE("Choi certificate: conjugations are CP, the transpose is not") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 61);
  CpCertificate cp = cp_certificate(SuperOperator::sandwich(a.adjoint(), a));
  CHECK(cp.cp);
  CHECK(cp.min_eig >= -1e-10);

  // Sums of conjugations stay CP.
  AlgebraElement b = random_el(alg, 62);
  SuperOperator sum = SuperOperator::sandwich(a.adjoint(), a);
  sum += SuperOperator::sandwich(b.adjoint(), b);
  CHECK(cp_certificate(sum).cp);

  // Transpose on M_2: Choi min eigenvalue is exactly -1.
  AlgebraPtr m2 = BlockAlgebra::full_matrix(2);
  CpCertificate tr = cp_certificate(transpose_map(m2));
  CHECK_FALSE(tr.cp);
  CHECK(tr.min_eig == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("amplified map agrees with entrywise application") {
  AlgebraPtr alg = BlockAlgebra::make({2, 2}, {0.5, 0.25});
  AlgebraElement a = random_el(alg, 71);
  SuperOperator phi = SuperOperator::sandwich(a.adjoint(), a);
  SuperOperator phi2 = amplify(phi, 2);
  AlgebraPtr amp = BlockAlgebra::amplified(alg, 2);
  AlgebraElement x = random_el(amp, 72);
  CHECK(l2_norm(phi2(x) - amplified_apply(phi, 2, x)) < 1e-12);
  // CP passes through the amplification.
  CHECK(cp_certificate(phi2).cp);
}

TEST_CASE("positivity verdicts: transpose is positive but not 2-positive") {
  AlgebraPtr m2 = BlockAlgebra::full_matrix(2);
  SuperOperator tr = transpose_map(m2);
  PositivityReport p1 = positivity_check(tr, 1);
  // Rank-one probes cannot break the transpose at order 1: X -> X^T maps
  // PSD to PSD. The Choi matrix is still negative, hence "inconclusive".
  CHECK(p1.verdict == PositivityVerdict::inconclusive);
  CHECK(p1.choi_min_eig == doctest::Approx(-1.0).epsilon(1e-12));

  PositivityReport p2 = positivity_check(tr, 2);
  CHECK(p2.verdict == PositivityVerdict::violated);
  REQUIRE(p2.witness.has_value());
  // The witness is PSD but its image under id_2 (x) transpose is not.
  CHECK(is_positive_el(*p2.witness, 1e-10));
  CHECK(p2.witness_output_min_eig < -0.5);
}

TEST_CASE("positivity verdicts: CP maps come back positive") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 81);
  PositivityReport rep =
      positivity_check(SuperOperator::sandwich(a.adjoint(), a), 2);
  CHECK(rep.verdict == PositivityVerdict::positive);
}

TEST_CASE("positivity verdicts: genuinely non-positive maps are caught") {
  AlgebraPtr m2 = BlockAlgebra::full_matrix(2);
  // X -> X - tr(X) I is not positive: on a rank-one projection the output
  // has an eigenvalue -1.
  SuperOperator bad = SuperOperator::from_function(m2, [&](
      const AlgebraElement& x) {
    Matrix m = x.block(0);
    Matrix out = m - m.trace() * Matrix::Identity(2, 2);
    return AlgebraElement(m2, {out});
  });
  PositivityReport rep = positivity_check(bad, 1);
  CHECK(rep.verdict == PositivityVerdict::violated);
  REQUIRE(rep.witness.has_value());
  CHECK(is_positive_el(*rep.witness, 1e-10));
}

TEST_CASE("positive map norm via the value at the identity") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 91);
  SuperOperator conj = SuperOperator::sandwich(a.adjoint(), a);
  CHECK(positive_map_norm(conj) ==
        doctest::Approx(op_norm(a.adjoint() * a)).epsilon(1e-10));
  AlgebraPtr m2 = BlockAlgebra::full_matrix(2);
  CHECK_THROWS_AS(positive_map_norm(transpose_map(m2)), Error);
}

TEST_CASE("resource guards") {
  AlgebraPtr big = BlockAlgebra::full_matrix(80);  // coord dim 6400 > cap
  CHECK_THROWS_AS(SuperOperator::identity_map(big), Error);
  try {
    SuperOperator::identity_map(big);
  } catch (const Error& e) {
    CHECK(e.code() == errc::resource_limit);
  }
  AlgebraPtr alg = BlockAlgebra::full_matrix(2);
  SuperOperator id = SuperOperator::identity_map(alg);
  CHECK_THROWS_AS(positivity_check(id, 300), Error);  // 300 * 2 > 512
}

TEST_CASE("composition, arithmetic and application") {
  AlgebraPtr alg = two_block();
  AlgebraElement a = random_el(alg, 101);
  AlgebraElement b = random_el(alg, 102);
  SuperOperator left = SuperOperator::sandwich(a, AlgebraElement::identity(alg));
  SuperOperator right = SuperOperator::sandwich(AlgebraElement::identity(alg), b);
  AlgebraElement x = random_el(alg, 103);
  // Left and right multiplications commute and compose to the sandwich.
  CHECK((left.compose(right).action() - right.compose(left).action())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(l2_norm(left.compose(right)(x) - a * x * b) < 1e-12);
  SuperOperator diff = left;
  diff -= left;
  CHECK(diff.l2_extension_norm() < 1e-14);
}
