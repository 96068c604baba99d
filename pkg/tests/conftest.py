import math
from fractions import Fraction

import pytest

from affheat.rootsys import QParams, build_root_system
from affheat.walk import WalkSpec, build_kappa


@pytest.fixture(scope="session")
def a1():
    rs = build_root_system("A1")
    return rs, QParams.create(rs, {0: 2, 1: 2})


@pytest.fixture(scope="session")
def a2():
    rs = build_root_system("A2")
    return rs, QParams.create(rs, {0: 2, 1: 2, 2: 2})


@pytest.fixture(scope="session")
def a1_pure_walk(a1):
    rs, q = a1
    return WalkSpec.create(rs, {(1,): 1})


@pytest.fixture(scope="session")
def a1_lazy_walk(a1):
    rs, q = a1
    return WalkSpec.create(rs, {(0,): Fraction(1, 10), (1,): Fraction(9, 10)})


@pytest.fixture(scope="session")
def a1_pure_km(a1, a1_pure_walk):
    rs, q = a1
    return build_kappa(rs, q, a1_pure_walk)


@pytest.fixture(scope="session")
def a1_lazy_km(a1, a1_lazy_walk):
    rs, q = a1
    return build_kappa(rs, q, a1_lazy_walk)


@pytest.fixture(scope="session")
def a2_chiral_walk(a2):
    rs, q = a2
    return WalkSpec.create(rs, {(1, 0): 1})


@pytest.fixture(scope="session")
def a2_chiral_km(a2, a2_chiral_walk):
    rs, q = a2
    return build_kappa(rs, q, a2_chiral_walk)


ALL_QSETS = {
    "A1": {0: 2, 1: 2},
    "A2": {0: 2, 1: 2, 2: 2},
    "B2": {0: 2, 1: 2, 2: 3},
    "C2": {0: 2, 1: 3, 2: 2},
    "G2": {0: 3, 1: 2, 2: 3},
    "BC1": {0: 2, 1: 3},
    "BC2": {0: 2, 1: 2, 2: 3},
}


@pytest.fixture(params=sorted(ALL_QSETS))
def any_family(request):
    fam = request.param
    rs = build_root_system(fam)
    return rs, QParams.create(rs, ALL_QSETS[fam])
