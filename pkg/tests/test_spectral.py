import math
from fractions import Fraction

import numpy as np
import pytest

from affheat.errors import (
    ExceptionalCaseUnsupported,
    ResolutionCapExceeded,
    SingularPoint,
)
from affheat.rootsys import QParams, build_root_system, eta, n_lambda, poincare
from affheat.spectral import (
    ExpPoly,
    build_grid,
    c_function,
    c_function_grouped,
    ground_state,
    spherical_direct,
    spherical_expoly,
    spherical_eval,
)
from tests.conftest import ALL_QSETS


def test_c_function_a1_value(a1):
    rs, q = a1
    # <z, alpha_v> = log 2 gives (1 - 1/4) / (1 - 1/2) = 3/2
    z = np.array([0.5 * math.log(2), -0.5 * math.log(2)], dtype=complex)
    assert abs(c_function(rs, q, z) - 1.5) < 1e-14


def test_c_function_limit_is_one(a1):
    rs, q = a1
    z = np.array([40.0, -40.0], dtype=complex)
    assert abs(c_function(rs, q, z) - 1.0) < 1e-12


def test_c_function_singular(a1):
    rs, q = a1
    with pytest.raises(SingularPoint):
        c_function(rs, q, np.zeros(2, dtype=complex))


@pytest.mark.parametrize("family", sorted(ALL_QSETS))
def test_c_function_grouped_agreement(family):
    rs = build_root_system(family)
    q = QParams.create(rs, ALL_QSETS[family])
    rng = np.random.default_rng(3)
    for _ in range(5):
        z = rng.normal(size=rs.ambient) * 0.7 + 1j * rng.normal(size=rs.ambient)
        a = c_function(rs, q, z)
        b = c_function_grouped(rs, q, z)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("family", sorted(ALL_QSETS))
def test_weyl_sum_of_c_is_poincare(family):
    # Summing the c-factor over the Weyl group gives the Poincare sum,
    # which pins both the c-function and the length/parameter tables.
    rs = build_root_system(family)
    q = QParams.create(rs, ALL_QSETS[family])
    rng = np.random.default_rng(5)
    z = rng.normal(size=rs.ambient) * 0.4 + 1j * rng.normal(size=rs.ambient) * 0.3
    acc = 0.0
    for w in rs.weyl:
        mw = np.array([[float(c) for c in row] for row in w.matrix])
        acc += c_function(rs, q, mw @ z)
    assert abs(acc - float(poincare(rs, q))) < 1e-10


def test_p0_is_one(a2):
    rs, q = a2
    rng = np.random.default_rng(11)
    for _ in range(5):
        z = rng.normal(size=3) * 0.5 + 1j * rng.normal(size=3) * 0.5
        assert abs(spherical_direct(rs, q, (0, 0), z) - 1.0) < 1e-11


def test_spherical_weyl_invariance(a2):
    rs, q = a2
    rng = np.random.default_rng(13)
    z = rng.normal(size=3) * 0.4 + 1j * rng.normal(size=3) * 0.4
    vals = []
    for w in rs.weyl:
        mw = np.array([[float(c) for c in row] for row in w.matrix])
        vals.append(spherical_direct(rs, q, (2, 1), mw @ z))
    assert max(abs(v - vals[0]) for v in vals) < 1e-10


def test_a1_tree_spherical_closed_form(a1):
    rs, q = a1
    rng = np.random.default_rng(17)
    for d in (1, 2, 5):
        z = rng.normal(size=2) * 0.5 + 1j * rng.normal(size=2) * 0.5
        lam1 = np.array([0.5, -0.5])
        t = complex(z @ lam1) * d
        closed = 0.0
        # two-term Weyl sum collapses to a cosh-type expression for d = 1
        val = spherical_direct(rs, q, (d,), z)
        ep = spherical_eval(rs, q, (d,), z)
        assert abs(val - ep) < 1e-10
        if d == 1:
            closed = 2 * math.sqrt(2) * np.cosh(t) / 3
            assert abs(val - closed) < 1e-12


def test_spherical_at_eta_is_one(a1, a2):
    for rs, q in (a1, a2):
        ev = eta(rs, q).cart_float()
        for lam in rs.dominant_ball(3.0):
            assert abs(spherical_eval(rs, q, lam, ev.astype(complex)) - 1) < 1e-10


def test_expoly_counts_a1(a1):
    rs, q = a1
    ep = spherical_expoly(rs, q, (1,))
    assert ep.counts == {(1,): 1, (-1,): 2}
    ep2 = spherical_expoly(rs, q, (2,))
    assert ep2.counts == {(2,): 1, (0,): 1, (-2,): 4}  # (1, q-1, q^2)


def test_expoly_counts_a2(a2):
    rs, q = a2
    ep = spherical_expoly(rs, q, (1, 0))
    assert ep.counts == {(1, 0): 1, (-1, 1): 2, (0, -1): 4}
    assert sum(ep.counts.values()) == 7


def test_expoly_zero(a1):
    rs, q = a1
    ep = spherical_expoly(rs, q, (0,))
    assert ep.counts == {(0,): 1}


def test_expoly_counts_weighted_by_chi0_sum_to_n(a2):
    # sum_mu m(mu) chi0(mu) = N_lambda, a nontrivial identity tying counts
    # to the volume character
    rs, q = a2
    from affheat.rootsys import chi0

    for lam in [(1, 0), (1, 1), (2, 1)]:
        ep = spherical_expoly(rs, q, lam)
        total = sum(m * chi0(rs, q, mu) for mu, m in ep.counts.items())
        assert total == n_lambda(rs, q, lam)


def test_expoly_matches_direct_at_random_points(a2):
    rs, q = a2
    rng = np.random.default_rng(23)
    for lam in [(1, 1), (3, 0)]:
        nl = float(n_lambda(rs, q, lam))
        ep = spherical_expoly(rs, q, lam)
        for _ in range(20):
            z = rng.normal(size=3) * 0.4 + 1j * rng.normal(size=3) * 2.0
            direct = spherical_direct(rs, q, lam, z)
            via = ep.eval_cart(rs, z) / nl
            assert abs(direct - via) <= 1e-9 * max(1.0, abs(direct))


def test_expoly_stable_under_resolution_doubling(a2):
    rs, q = a2
    base = spherical_expoly(rs, q, (2, 1))
    m = 2 * max(max(abs(c) for c in mu) for mu in base.counts) + 5
    fine = spherical_expoly(rs, q, (2, 1), resolution=2 * m)
    assert base.counts == fine.counts


def test_expoly_support_and_positivity(a2):
    rs, q = a2
    from affheat.rootsys import saturation

    for lam in [(1, 0), (2, 0), (1, 1)]:
        ep = spherical_expoly(rs, q, lam)
        assert set(ep.counts) <= saturation(rs, lam)
        assert all(m > 0 for m in ep.counts.values())
        assert all(c > 0 for c in ep.terms.values())


def test_expoly_json_roundtrip(a1):
    rs, q = a1
    ep = spherical_expoly(rs, q, (2,))
    back = ExpPoly.from_json(ep.to_json())
    assert back.counts == ep.counts
    assert back.terms.keys() == ep.terms.keys()


def test_ground_state_tree_closed_form(a1):
    rs, q = a1
    for d in range(31):
        closed = 2.0 ** (-d / 2) * (1 + d / 3)
        assert abs(ground_state(rs, q, (d,)) - closed) < 1e-12


def test_ground_state_range(a2):
    rs, q = a2
    for lam in rs.dominant_ball(4.0):
        val = ground_state(rs, q, lam)
        assert 0 < val <= 1
    assert ground_state(rs, q, (0, 0)) == 1.0


# -- quadrature grid ----------------------------------------------------------


def test_grid_mass_and_orthogonality(a1, a2):
    for (rs, q), res in ((a1, 256), (a2, 128)):
        grid = build_grid(rs, q, resolution=res, check_radius=6.0)
        assert abs(float(np.sum(grid.weights)) - 1.0) < 1e-8
        assert grid.orthogonality_residual < 1e-8


def test_grid_pairing_examples(a1):
    rs, q = a1
    grid = build_grid(rs, q, resolution=256, check_radius=0.0)
    assert abs(grid.pairing((1,), (1,)) - 1 / 3) < 1e-10
    assert abs(grid.pairing((0,), (1,))) < 1e-10
    assert abs(grid.pairing((0,), (0,)) - 1.0) < 1e-10


def test_grid_residual_shrinks_geometrically(a1):
    rs, q = a1
    res_small = build_grid(rs, q, resolution=16, check_radius=0.0)
    res_big = build_grid(rs, q, resolution=32, check_radius=0.0)

    def orth_resid(grid):
        lams = rs.dominant_ball(6.0)
        p = grid.spherical_matrix(lams)
        gram = (p * grid.weights) @ np.conj(p.T)
        expected = np.diag([1.0 / float(n_lambda(rs, q, l)) for l in lams])
        return float(np.max(np.abs(gram - expected)))

    r16, r32 = orth_resid(res_small), orth_resid(res_big)
    assert r32 < 0.5 * r16


def test_grid_exceptional_case_rejected():
    rs = build_root_system("BC2")
    q = QParams.create(rs, {0: 3, 1: 2, 2: 2})  # q_r < q_0: some tau < 1
    with pytest.raises(ExceptionalCaseUnsupported):
        build_grid(rs, q)


def test_grid_resolution_cap(a2):
    rs, q = a2
    with pytest.raises(ResolutionCapExceeded):
        build_grid(rs, q, resolution=16, check_radius=6.0, max_doublings=0)


def test_grid_other_families_coarse():
    for fam, qd in (("B2", {0: 2, 1: 2, 2: 3}), ("BC2", {0: 2, 1: 2, 2: 3}),
                    ("G2", {0: 3, 1: 2, 2: 3})):
        rs = build_root_system(fam)
        q = QParams.create(rs, qd)
        grid = build_grid(rs, q, resolution=64, check_radius=3.0, orth_tol=1e-6)
        assert grid.orthogonality_residual < 1e-6
