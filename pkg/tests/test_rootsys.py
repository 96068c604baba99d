import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affheat.errors import ConfigError, NonDominant
from affheat.rootsys import (
    FAMILIES,
    WEYL_ORDER,
    QParams,
    build_root_system,
    chi0,
    eta,
    n_lambda,
    poincare,
    saturation,
    tau_double,
    tau_of,
    vdot,
    vscale,
)
from tests.conftest import ALL_QSETS


# -- construction invariants --------------------------------------------------


@pytest.mark.parametrize("family", FAMILIES)
def test_weyl_order_matches_family(family):
    rs = build_root_system(family)
    assert len(rs.weyl) == WEYL_ORDER[family]


@pytest.mark.parametrize("family", FAMILIES)
def test_dual_basis_property(family):
    rs = build_root_system(family)
    for i, lam in enumerate(rs.fundamental_coweights):
        for j, a in enumerate(rs.simple_roots):
            assert vdot(lam, a) == int(i == j)


@pytest.mark.parametrize("family", FAMILIES)
def test_weyl_preserves_roots_and_w0_flips_positive(family):
    rs = build_root_system(family)
    roots = {vscale(Fraction(s), a) for a in rs.pos_roots for s in (1, -1)}
    for w in rs.weyl:
        assert {w.apply_cart(a) for a in roots} == roots
    w0 = rs.weyl[rs.w0_index]
    assert {w0.apply_cart(a) for a in rs.pos_indivisible} == {
        vscale(Fraction(-1), a) for a in rs.pos_indivisible
    }


def test_nonreduced_structure_only_for_bc():
    for family in FAMILIES:
        rs = build_root_system(family)
        divisible = [a for a in rs.pos_roots
                     if vscale(Fraction(1, 2), a) in set(rs.pos_roots)]
        if family.startswith("BC"):
            assert divisible
            for a in divisible:
                half = vscale(Fraction(1, 2), a)
                assert vscale(Fraction(2), half) == a
        else:
            assert not divisible


def test_counts_examples():
    assert build_root_system("A1").rank == 1
    assert len(build_root_system("A1").pos_roots) == 1
    # rank-two enumerations, done by hand from the root tables
    a2 = build_root_system("A2")
    assert len(a2.pos_indivisible) == 3 and len(a2.weyl) == 6
    bc2 = build_root_system("BC2")
    assert len(bc2.pos_roots) == 6 and len(bc2.pos_indivisible) == 4


def test_good_types():
    assert sorted(build_root_system("A1").good_types) == [0, 1]
    assert sorted(build_root_system("A2").good_types) == [0, 1, 2]
    assert sorted(build_root_system("C2").good_types) == [0, 2]
    assert sorted(build_root_system("G2").good_types) == [0]
    assert sorted(build_root_system("BC2").good_types) == [0]


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=2))
@settings(max_examples=40, deadline=None)
def test_gram_agrees_with_cartesian(coords):
    rs = build_root_system("A2")
    x = tuple(coords)
    cart = rs.to_cart_exact(x)
    assert rs.pair_exact(x, x) == vdot(cart, cart)


# -- q parameters -------------------------------------------------------------


def test_thickness_rejected():
    rs = build_root_system("A1")
    with pytest.raises(ConfigError, match="thick"):
        QParams.create(rs, {0: 1, 1: 1})


def test_label_class_validation():
    rs = build_root_system("A2")
    with pytest.raises(ConfigError, match="regularity"):
        QParams.create(rs, {0: 2, 1: 2, 2: 3})
    rs = build_root_system("C2")
    with pytest.raises(ConfigError):
        QParams.create(rs, {0: 2, 1: 2, 2: 3})  # needs q_0 = q_2


def test_bc_requires_distinct_end_parameters():
    rs = build_root_system("BC2")
    with pytest.raises(ConfigError, match="C-type"):
        QParams.create(rs, {0: 2, 1: 2, 2: 2})


def test_bc_tau_table():
    rs = build_root_system("BC2")
    q = QParams.create(rs, {0: 2, 1: 2, 2: 3})
    short = (Fraction(1), Fraction(0))
    double = (Fraction(2), Fraction(0))
    long_root = (Fraction(1), Fraction(1))
    assert tau_of(rs, q, short) == Fraction(3, 2)   # q_r / q_0
    assert tau_of(rs, q, double) == 2               # q_0
    assert tau_of(rs, q, long_root) == 2            # interior label
    assert tau_double(rs, q, short) == 2
    # tau * tau_double^2 > 1 for every indivisible root
    for a in rs.pos_indivisible:
        assert tau_of(rs, q, a) * tau_double(rs, q, a) ** 2 > 1


# -- eta ----------------------------------------------------------------------


def test_eta_simple_pairing_a1_q4():
    rs = build_root_system("A1")
    q = QParams.create(rs, {0: 4, 1: 4})
    a = rs.simple_roots[0]
    val = eta(rs, q).pair_cart(np.array([float(c) for c in a]))
    # 1/2 log(tau) <a, a> with <a, a> = 2
    assert abs(val - math.log(4)) < 1e-12


def test_eta_a2_coweight_pairing_is_log_q(a2):
    rs, q = a2
    assert abs(eta(rs, q).pair_float(rs, (1, 0)) - math.log(2)) < 1e-14


def test_eta_vanishes_as_q_to_one():
    rs = build_root_system("A1")
    q = QParams.create(rs, {0: Fraction(101, 100), 1: Fraction(101, 100)})
    assert abs(eta(rs, q).pair_float(rs, (1,))) < 0.02


@pytest.mark.parametrize("family", sorted(ALL_QSETS))
def test_w0_image_of_eta_exact(family):
    rs = build_root_system(family)
    q = QParams.create(rs, ALL_QSETS[family])
    ev = eta(rs, q)
    w0 = rs.weyl[rs.w0_index]
    assert ev.weyl_image(rs, w0).equals(ev.negate())


def test_eta_positive_on_dominant(any_family):
    rs, q = any_family
    ev = eta(rs, q)
    for lam in rs.dominant_ball(5.0):
        if any(lam):
            assert ev.pair_float(rs, lam) > 0


def test_chi0_matches_exponential(any_family):
    rs, q = any_family
    ev = eta(rs, q)
    for lam in rs.dominant_ball(5.0):
        exact = float(chi0(rs, q, lam))
        assert abs(exact - math.exp(2 * ev.pair_float(rs, lam))) <= 1e-12 * exact


def test_chi0_examples(a1, a2):
    rs, q = a1
    assert chi0(rs, q, (1,)) == 2
    assert chi0(rs, q, (0,)) == 1
    rs2, q2 = a2
    assert chi0(rs2, q2, (1, 0)) == 4


# -- sphere volumes -----------------------------------------------------------


def test_n_lambda_tree_spheres(a1):
    rs, q = a1
    # direct tree count: the 3-regular tree has 3 * 2^(d-1) vertices at
    # distance d
    for d in range(1, 31):
        assert n_lambda(rs, q, (d,)) == 3 * 2 ** (d - 1)
    assert n_lambda(rs, q, (0,)) == 1


def test_n_lambda_a2(a2):
    rs, q = a2
    assert n_lambda(rs, q, (1, 0)) == 7  # q^2 + q + 1 at q = 2
    assert n_lambda(rs, q, (0, 0)) == 1


def test_n_lambda_requires_dominant(a1):
    rs, q = a1
    with pytest.raises(NonDominant):
        n_lambda(rs, q, (-1,))


def test_poincare_values(a1, a2):
    rs, q = a1
    assert poincare(rs, q) == Fraction(3, 2)
    rs2, q2 = a2
    assert poincare(rs2, q2) == Fraction(21, 8)          # lengths 0,1,1,2,2,3
    assert poincare(rs2, q2, stabilizer_of=(2, 1)) == 1  # interior point


# -- saturation sets ----------------------------------------------------------


def test_saturation_examples(a1, a2):
    rs, q = a1
    assert saturation(rs, (0,)) == {(0,)}
    assert saturation(rs, (2,)) == {(-2,), (0,), (2,)}
    rs2, _ = a2
    assert saturation(rs2, (1, 0)) == {(1, 0), (-1, 1), (0, -1)}


def test_saturation_contains_orbit_and_is_weyl_stable(a2):
    rs, _ = a2
    for lam in [(1, 1), (2, 0), (2, 1)]:
        sat = saturation(rs, lam)
        assert set(rs.orbit(lam)) <= sat
        for w in rs.weyl:
            assert {w.apply_coords(mu) for mu in sat} == sat


def test_saturation_dominance_closure(a2):
    rs, _ = a2
    lam = (2, 2)
    sat = saturation(rs, lam)
    for mu in sat:
        assert rs.dominance_leq(rs.dominant_rep(mu), lam)


def test_star_involution(a2):
    rs, _ = a2
    assert rs.star((2, 0)) == (0, 2)
    assert rs.star(rs.star((3, 1))) == (3, 1)
