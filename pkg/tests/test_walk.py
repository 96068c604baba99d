import math
from fractions import Fraction

import numpy as np
import pytest

from affheat.errors import ConfigError, DegenerateDirection, OutsideHull
from affheat.oracles import finite_difference_gradient, finite_difference_hessian
from affheat.rootsys import eta
from affheat.walk import (
    WalkSpec,
    build_kappa,
    certify_admissible,
    hessian,
    hessian_double_sum,
    rate_function,
    saddle,
    sp_delta_p,
)


def test_walkspec_validation(a1):
    rs, q = a1
    with pytest.raises(ConfigError, match="sum to 1"):
        WalkSpec.create(rs, {(1,): Fraction(1, 2)})
    with pytest.raises(ConfigError, match="positive"):
        WalkSpec.create(rs, {(1,): Fraction(3, 2), (0,): Fraction(-1, 2)})
    with pytest.raises(Exception):
        WalkSpec.create(rs, {(-1,): 1})


def test_rho_tree_value(a1_pure_km):
    assert abs(a1_pure_km.rho - 2 * math.sqrt(2) / 3) < 1e-10


def test_lazy_walk_trivial_kappa(a1):
    rs, q = a1
    km = build_kappa(rs, q, WalkSpec.create(rs, {(0,): 1}))
    assert km.rho == 1.0
    assert abs(km.kappa_real(np.array([0.3, -0.3])) - 1.0) < 1e-14
    with pytest.raises(DegenerateDirection):
        hessian(km, np.zeros(2))


def test_kappa_closed_form_on_eta_segment(a1, a1_pure_km):
    rs, q = a1
    ev = eta(rs, q).cart_float()
    for t in np.linspace(0, 1, 7):
        assert abs(a1_pure_km.kappa_real(t * ev)
                   - math.cosh(t * math.log(2) / 2)) < 1e-12


def test_kappa_invariants(a1_lazy_km):
    km = a1_lazy_km
    assert abs(km.kappa_real(np.zeros(2)) - 1.0) < 1e-12
    ev = eta(km.rs, km.q).cart_float()
    assert abs(km.kappa_real(ev) * km.rho - 1.0) < 1e-10
    assert all(c > 0 for c in km.coeffs)


def test_kappa_modulus_at_most_one_on_torus(a2_chiral_km, a2):
    rs, q = a2
    from affheat.kernel import shared_grid

    grid = shared_grid(rs, q)
    vals = np.abs(a2_chiral_km.kappa_on_nodes(grid.nodes))
    assert float(vals.max()) <= 1.0 + 1e-12


def test_hessian_matches_finite_differences(a1_lazy_km, a2_chiral_km):
    rng = np.random.default_rng(31)
    for km in (a1_lazy_km, a2_chiral_km):
        for _ in range(10):
            x_span = rng.normal(size=km.rs.rank) * 0.3
            x = km.basis.T @ x_span

            def logk(y_span):
                return math.log(km.kappa_real(km.basis.T @ y_span))

            fd = finite_difference_hessian(logk, x_span)
            an = km.hessian_log_kappa(x)
            assert np.max(np.abs(fd - an)) < 1e-6


def test_hessian_double_sum_form(a1_lazy_km):
    km = a1_lazy_km
    rng = np.random.default_rng(37)
    for _ in range(10):
        x = km.basis.T @ (rng.normal(size=1) * 0.5)
        u = km.basis.T @ rng.normal(size=1)
        quad = float((km.basis @ u) @ km.hessian_log_kappa(x) @ (km.basis @ u))
        assert abs(quad - hessian_double_sum(km, x, u)) < 1e-12


def test_saddle_at_zero_for_symmetric_walk(a1_lazy_km):
    s, phi = saddle(a1_lazy_km, np.zeros(2))
    assert np.linalg.norm(s) < 1e-10
    assert abs(phi) < 1e-14


def test_saddle_residual_and_duality(a1_lazy_km):
    km = a1_lazy_km
    rng = np.random.default_rng(41)
    hi = km.hull_vertices[:, 0].max()
    for _ in range(25):
        dvec = km.basis.T @ np.array([rng.uniform(-0.85, 0.85) * hi])
        s, phi = saddle(km, dvec)
        assert np.linalg.norm(km.grad_log_kappa(s) - dvec) <= 1e-12
        assert phi >= -1e-15
        g = finite_difference_gradient(lambda x: rate_function(km, x), dvec)
        proj = km.basis.T @ (km.basis @ g)
        assert np.linalg.norm(proj - s) < 1e-5


def test_saddle_outside_hull(a1_lazy_km):
    km = a1_lazy_km
    far = km.basis.T @ np.array([10.0])
    with pytest.raises(OutsideHull):
        saddle(km, far)


def test_sp_delta_p(a1_pure_km, a1):
    rs, q = a1
    ev = eta(rs, q).cart_float()
    s2, _ = sp_delta_p(a1_pure_km, 2.0)
    assert np.linalg.norm(s2) == 0
    s1, d1 = sp_delta_p(a1_pure_km, 1.0)
    assert np.linalg.norm(s1 - ev) < 1e-15
    s43, _ = sp_delta_p(a1_pure_km, 4.0 / 3)
    lam1 = np.array([0.5, -0.5])
    assert abs(float(s43 @ lam1) - 0.5 * math.log(2) / 2) < 1e-14
    # delta_1 recovers eta through the saddle solve
    s_back, _ = saddle(a1_pure_km, d1)
    assert np.linalg.norm(s_back - ev) < 1e-10


def test_kappa_strictly_smaller_below_eta(a1_lazy_km):
    km = a1_lazy_km
    for p in (1.2, 1.5, 2.0):
        s_p, _ = sp_delta_p(km, p)
        assert km.kappa_real(s_p) < 1 / km.rho - 1e-12 or p == 1


def test_admissibility_certificates(a1, a1_pure_walk, a1_lazy_walk, a2,
                                    a2_chiral_walk):
    rs, q = a1
    rep = certify_admissible(rs, q, a1_pure_walk, horizon=16)
    assert rep.irreducible and not rep.aperiodic and rep.period == 2
    rep = certify_admissible(rs, q, a1_lazy_walk, horizon=16)
    assert rep.irreducible and rep.aperiodic
    rs2, q2 = a2
    rep = certify_admissible(rs2, q2, a2_chiral_walk, horizon=12)
    assert rep.irreducible and not rep.aperiodic and rep.period == 3


def test_quadratic_expansion_bound(a1_lazy_km):
    # phi(delta) comparable to |delta|^2 on a radial sweep inside the hull
    km = a1_lazy_km
    hi = km.hull_vertices[:, 0].max()
    ratios = []
    for t in np.linspace(0.05, 0.8, 12):
        dvec = km.basis.T @ np.array([t * hi])
        phi = rate_function(km, dvec)
        ratios.append(phi / float(dvec @ dvec))
    assert min(ratios) > 0
    assert max(ratios) / min(ratios) < 50
