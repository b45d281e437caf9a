#!/usr/bin/env python3
"""Smoke tests for the python extension: every main operation is exercised
once with values that have closed forms."""

import math

import numpy as np

import finvn


def test_algebra_and_elements():
    alg = finvn.Algebra([2, 3], [0.5, 2.0])
    assert alg.total_dim == 5
    assert alg.elem_dim == 13
    x = finvn.Element.identity(alg)
    # tau(1) = 0.5 * 2 + 2.0 * 3
    assert abs(finvn.trace(x) - (1.0 + 6.0)) < 1e-12

    blocks = [np.array([[1, 2j], [0, 1]], dtype=complex), np.eye(3, dtype=complex)]
    y = finvn.Element(alg, blocks)
    got = y.blocks
    assert np.allclose(got[0], blocks[0]) and np.allclose(got[1], blocks[1])
    assert np.allclose(y.adjoint().blocks[0], blocks[0].conj().T)

    z = finvn.Element.from_coords(alg, y.coords())
    assert abs(finvn.l2_norm(z - y)) < 1e-12
    assert finvn.is_positive(finvn.Element(alg, [b.conj().T @ b for b in blocks]))


def test_gauge_analytics():
    g = finvn.Gauge.geometric(1.25)
    an = finvn.analyze_gauge(g, 4096)
    assert an.valid and an.regular
    assert abs(an.growth - 1.25) < 1e-9

    lin = finvn.analyze_gauge(finvn.Gauge.poly(1), 4096)
    assert lin.valid and not lin.regular

    seq = [0.5 + (-1.0) ** n / (n + 1.0) for n in range(4096)]
    al = finvn.almost_limit(seq, 1e-3)
    assert al.converged and abs(al.estimate - 0.5) < 1e-3
    qp = finvn.q_prime([float(n % 2) for n in range(128)])
    assert abs(qp.value - 0.5) < 1e-12


def test_trace_adjoint():
    alg = finvn.Algebra([2], [1.0])
    a = finvn.Element(alg, [np.array([[1.0, 0.3], [0.0, 0.7j]])])
    b = finvn.Element(alg, [np.array([[2.0, 0.0], [0.1, 1.0]])])
    phi = finvn.SuperOperator.sandwich(a, b)
    hat = finvn.tau_adjoint(phi)
    # tau(phi(x) y) == tau(x hat(y)) for a seeded probe pair.
    rng = np.random.default_rng(11)
    for _ in range(4):
        x = finvn.Element(alg, [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))])
        y = finvn.Element(alg, [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))])
        lhs = finvn.trace(phi(x) * y)
        rhs = finvn.trace(x * hat(y))
        assert abs(lhs - rhs) < 1e-10
    # Involution and norm identity.
    assert np.allclose(finvn.tau_adjoint(hat).action, phi.action)
    assert abs(phi.l2_extension_norm() - hat.l2_extension_norm()) < 1e-12

    cp = finvn.cp_certificate(finvn.SuperOperator.conjugation(a))
    assert cp.cp and cp.min_eig > -1e-12

    transpose = finvn.SuperOperator.from_function(
        alg, lambda x: finvn.Element(alg, [x.block(0).T]))
    bad = finvn.cp_certificate(transpose)
    assert not bad.cp and bad.min_eig < -0.9
    pos = finvn.positivity_check(transpose, 2)
    assert pos.verdict == finvn.PositivityVerdict.violated


def test_orbit_limit_and_similarity():
    alg = finvn.Algebra([2], [1.0])
    t = finvn.Element(alg, [np.diag([1.0, 1.0j])])
    lim = finvn.orbit_limit(t, finvn.Gauge.constant(1.0))
    assert abs(lim.growth - 1.0) < 1e-9
    x = finvn.Element(alg, [np.array([[0.4, 1.0], [2.0, -0.3]], dtype=complex)])
    ex = lim.value(x).blocks[0]
    assert np.allclose(ex, np.diag([0.4, -0.3]), atol=1e-8)
    assert all(law.passed for law in finvn.verify_orbit_laws(t, lim))

    rep = finvn.similarity([t], [finvn.Gauge.constant(1.0)])
    assert rep.success and rep.max_unitarity_defect < 1e-8
    assert rep.r_min >= 1.0 - 1e-9
    u = rep.unitaries[0]
    assert finvn.is_unitary(u)

    joint = finvn.semigroup_limit([lim.value])
    assert joint.idempotent_residual < 1e-9


def test_error_translation():
    alg = finvn.Algebra([2], [1.0])
    jordan = finvn.Element(alg, [np.array([[1.0, 1.0], [0.0, 1.0]])])
    try:
        finvn.orbit_limit(jordan, finvn.Gauge.constant(1.0))
    except finvn.Error as e:
        assert "NotDominated" in str(e)
    else:
        raise AssertionError("Jordan block orbit limit should be refused")

    bad = finvn.similarity(
        [finvn.Element(alg, [np.diag([0.5, 1.0]).astype(complex)])],
        [finvn.Gauge.constant(1.0)])
    assert not bad.success and bad.code == "NotC1"
    assert bad.nullspace_witness is not None


def main():
    tests = [(k, v) for k, v in sorted(globals().items())
             if k.startswith("test_") and callable(v)]
    for name, fn in tests:
        fn()
        print(f"[ok  ] {name}")
    print(f"{len(tests)}/{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
