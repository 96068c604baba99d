"""Exact root-system, Weyl-group and lattice combinatorics.

Everything here is computed in rational arithmetic (fractions.Fraction).
Lattice points are integer coordinate tuples in the fundamental-coweight
basis; equivalently, the i-th coordinate of x is the pairing <x, alpha_i>
with the i-th simple root.  Logs and floats are deferred to consumers,
except for the explicitly float-valued helpers.

Supported families (rank <= 2): A1, A2, B2, C2, G2, BC1, BC2.  Root
normalizations are fixed once per family: A-type roots have squared
length 2, the short roots e_i of the B/C/BC tables have squared length 1,
the G2 table uses the integral realization inside the sum-zero plane of
R^3.  All downstream formulas only use pairings, so only consistency of
the normalization matters.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NonDominant

Vec = tuple[Fraction, ...]
LatticePoint = tuple[int, ...]

FAMILIES = ("A1", "A2", "B2", "C2", "G2", "BC1", "BC2")

# Known Weyl group orders, used as a construction invariant.
WEYL_ORDER = {"A1": 2, "A2": 6, "B2": 8, "C2": 8, "G2": 12, "BC1": 2, "BC2": 8}


def _fr(x) -> Fraction:
    return Fraction(x)


def _vec(*xs) -> Vec:
    return tuple(Fraction(x) for x in xs)


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def vdot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def coroot(a: Vec) -> Vec:
    return vscale(Fraction(2) / vdot(a, a), a)


# Simple roots per family, in exact Cartesian coordinates.
_SIMPLE_ROOTS: dict[str, tuple[Vec, ...]] = {
    "A1": (_vec(1, -1),),
    "A2": (_vec(1, -1, 0), _vec(0, 1, -1)),
    "B2": (_vec(1, -1), _vec(0, 1)),
    "C2": (_vec(1, -1), _vec(0, 2)),
    "G2": (_vec(1, -1, 0), _vec(-1, 2, -1)),
    "BC1": (_vec(1),),
    "BC2": (_vec(1, -1), _vec(0, 1)),
}

# Positive roots beyond the simple ones.  Divisible roots (2*alpha also a
# root) occur exactly in the BC families.
_EXTRA_POS: dict[str, tuple[Vec, ...]] = {
    "A1": (),
    "A2": (_vec(1, 0, -1),),
    "B2": (_vec(1, 0), _vec(1, 1)),
    "C2": (_vec(1, 1), _vec(2, 0)),
    "G2": (_vec(0, 1, -1), _vec(1, 0, -1), _vec(2, -1, -1), _vec(1, 1, -2)),
    "BC1": (_vec(2),),
    "BC2": (_vec(1, 0), _vec(1, 1), _vec(2, 0), _vec(0, 2)),
}

# Label classes: q_i must agree within a class (reflection conjugacy in the
# affine Coxeter group, plus the orbit constraint tying the affine label 0
# to the simple root whose Weyl orbit contains the highest root).
_LABEL_CLASSES: dict[str, tuple[tuple[int, ...], ...]] = {
    "A1": ((0, 1),),
    "A2": ((0, 1, 2),),
    "B2": ((0, 1), (2,)),
    "C2": ((0, 2), (1,)),
    "G2": ((0, 2), (1,)),
    "BC1": ((0,), (1,)),
    "BC2": ((0,), (1,), (2,)),
}


@dataclass(frozen=True)
class WeylElement:
    matrix: tuple[Vec, ...]            # Cartesian action, rows of the matrix
    coweight_matrix: tuple[tuple[int, ...], ...]  # action on coweight coords
    length: int
    word: tuple[int, ...]              # one reduced word in simple reflections

    def apply_cart(self, v: Vec) -> Vec:
        return tuple(vdot(row, v) for row in self.matrix)

    def apply_coords(self, x: LatticePoint) -> LatticePoint:
        return tuple(
            sum(m * c for m, c in zip(row, x)) for row in self.coweight_matrix
        )


class RootSystem:
    """Immutable container for one family's exact root data.

    Instances are interned per family; share them freely across threads.
    """

    def __init__(self, family: str):
        if family not in FAMILIES:
            raise ConfigError(f"unknown root system family: {family!r}")
        self.family = family
        self.simple_roots = _SIMPLE_ROOTS[family]
        self.rank = len(self.simple_roots)
        self.ambient = len(self.simple_roots[0])
        pos = list(self.simple_roots) + list(_EXTRA_POS[family])
        self.pos_roots: tuple[Vec, ...] = tuple(pos)
        pos_set = set(pos)
        self.pos_indivisible: tuple[Vec, ...] = tuple(
            a for a in pos if vscale(Fraction(1, 2), a) not in pos_set
        )
        self.pos_divisible: tuple[Vec, ...] = tuple(
            a for a in pos if vscale(Fraction(1, 2), a) in pos_set
        )
        self.coroots: tuple[Vec, ...] = tuple(coroot(a) for a in pos)
        self.fundamental_coweights = self._solve_coweights()
        self.gram = tuple(
            tuple(vdot(li, lj) for lj in self.fundamental_coweights)
            for li in self.fundamental_coweights
        )
        den = 1
        for row in self.gram:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        self._gram_den = den
        self._gram_int = tuple(
            tuple(int(x * den) for x in row) for row in self.gram
        )
        self.highest_root = self._find_highest_root()
        self.marks = self._marks()
        self.good_types = frozenset(
            {0} | {i + 1 for i, m in enumerate(self.marks) if m == 1}
        )
        self.weyl = self._generate_weyl()
        self.w0_index = max(range(len(self.weyl)), key=lambda i: self.weyl[i].length)
        self._orbit_label = self._simple_orbit_labels()
        self._cone_generators = self._positive_coroot_generators()
        self._check_invariants()

    # -- construction helpers -------------------------------------------------

    def _solve_coweights(self) -> tuple[Vec, ...]:
        # Solve <lam_i, alpha_j> = delta_ij inside span(simple roots).
        n, r = self.ambient, self.rank
        out = []
        for i in range(r):
            # lam = sum_k c_k alpha_k, constraints <lam, alpha_j> = delta_ij.
            a = [[vdot(self.simple_roots[k], self.simple_roots[j]) for k in range(r)]
                 for j in range(r)]
            b = [Fraction(int(i == j)) for j in range(r)]
            c = _solve_fraction_system(a, b)
            lam = tuple(
                sum((c[k] * self.simple_roots[k][d] for k in range(r)), Fraction(0))
                for d in range(n)
            )
            out.append(lam)
        return tuple(out)

    def _find_highest_root(self) -> Vec:
        def height(a: Vec) -> Fraction:
            coeffs = self._in_simple_basis(a)
            return sum(coeffs, Fraction(0))

        return max(self.pos_roots, key=height)

    def _in_simple_basis(self, v: Vec) -> tuple[Fraction, ...]:
        a = [[vdot(self.simple_roots[k], self.simple_roots[j]) for k in range(self.rank)]
             for j in range(self.rank)]
        b = [vdot(v, self.simple_roots[j]) for j in range(self.rank)]
        return tuple(_solve_fraction_system(a, b))

    def _marks(self) -> tuple[int, ...]:
        coeffs = self._in_simple_basis(self.highest_root)
        marks = []
        for c in coeffs:
            if c.denominator != 1:
                raise AssertionError("highest root marks must be integers")
            marks.append(int(c))
        return tuple(marks)

    def _reflection(self, a: Vec) -> tuple[Vec, ...]:
        av = coroot(a)
        n = self.ambient
        return tuple(
            tuple((Fraction(int(i == j)) - av[i] * a[j]) for j in range(n))
            for i in range(n)
        )

    def _generate_weyl(self) -> tuple[WeylElement, ...]:
        gens = [self._reflection(a) for a in self.simple_roots]
        ident = tuple(
            tuple(Fraction(int(i == j)) for j in range(self.ambient))
            for i in range(self.ambient)
        )
        seen: dict[tuple[Vec, ...], tuple[int, ...]] = {ident: ()}
        frontier = [ident]
        while frontier:
            nxt = []
            for m in frontier:
                for gi, g in enumerate(gens):
                    prod = _matmul(g, m)  # apply g after m: word grows on left
                    if prod not in seen:
                        seen[prod] = (gi + 1,) + seen[m]
                        nxt.append(prod)
            frontier = nxt
        elements = []
        indiv = self.pos_indivisible
        indiv_neg = {vscale(Fraction(-1), a) for a in indiv}
        for m, word in seen.items():
            img = [tuple(vdot(row, a) for row in m) for a in indiv]
            length = sum(1 for v in img if v in indiv_neg)
            # Coweight-coordinate action: entry (i, j) = <w lam_j, alpha_i>.
            cwm = []
            for i in range(self.rank):
                row = []
                for j in range(self.rank):
                    wl = tuple(vdot(rrow, self.fundamental_coweights[j]) for rrow in m)
                    val = vdot(wl, self.simple_roots[i])
                    assert val.denominator == 1
                    row.append(int(val))
                cwm.append(tuple(row))
            elements.append(WeylElement(m, tuple(cwm), length, word))
        elements.sort(key=lambda e: (e.length, e.word))
        return tuple(elements)

    def _simple_orbit_labels(self) -> dict[Vec, int]:
        # Map each indivisible root (both signs) to the label j of a simple
        # root in its W-orbit.
        label: dict[Vec, int] = {}
        for j, a in enumerate(self.simple_roots, start=1):
            for w in self.weyl:
                for sgn in (1, -1):
                    label.setdefault(vscale(Fraction(sgn), w.apply_cart(a)), j)
        return label

    def _positive_coroot_generators(self) -> tuple[LatticePoint, ...]:
        # Minimal generating set of the monoid spanned by positive coroots,
        # in coweight coordinates.  For every supported family the minimal
        # set has exactly `rank` linearly independent members, so membership
        # reduces to an exact linear solve (checked below).
        gens = sorted({self.to_coords_exact(cv) for cv in self.coroots})
        for subset in itertools.combinations(gens, self.rank):
            basis = list(subset)
            if all(_cone_member_indep(g, basis) for g in gens):
                return tuple(basis)
        raise AssertionError(f"no rank-sized coroot cone basis for {self.family}")

    def _check_invariants(self) -> None:
        assert len(self.weyl) == WEYL_ORDER[self.family]
        for i, li in enumerate(self.fundamental_coweights):
            for j, aj in enumerate(self.simple_roots):
                assert vdot(li, aj) == int(i == j)
        all_roots = {vscale(Fraction(s), a) for a in self.pos_roots for s in (1, -1)}
        for w in self.weyl:
            assert {w.apply_cart(a) for a in all_roots} == all_roots
        w0 = self.weyl[self.w0_index]
        neg_indiv = {vscale(Fraction(-1), a) for a in self.pos_indivisible}
        assert {w0.apply_cart(a) for a in self.pos_indivisible} == neg_indiv
        if self.family.startswith("BC"):
            assert self.pos_divisible, "BC families must be non-reduced"
        else:
            assert not self.pos_divisible

    # -- lattice helpers -------------------------------------------------------

    def zero(self) -> LatticePoint:
        return (0,) * self.rank

    def to_cart_exact(self, x: LatticePoint) -> Vec:
        acc = (Fraction(0),) * self.ambient
        for c, lam in zip(x, self.fundamental_coweights):
            acc = vadd(acc, vscale(Fraction(c), lam))
        return acc

    def to_coords_exact(self, v: Vec) -> LatticePoint:
        coords = []
        for a in self.simple_roots:
            val = vdot(v, a)
            if val.denominator != 1:
                raise ValueError(f"{v} is not a coweight lattice point")
            coords.append(int(val))
        return tuple(coords)

    def to_cart(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.coweight_cart_matrix()

    @lru_cache(maxsize=None)
    def coweight_cart_matrix(self) -> np.ndarray:
        return np.array(
            [[float(c) for c in lam] for lam in self.fundamental_coweights]
        )

    def pair_exact(self, x: LatticePoint, y: LatticePoint) -> Fraction:
        g = self._gram_int
        acc = 0
        for i, xi in enumerate(x):
            row = g[i]
            for j, yj in enumerate(y):
                acc += xi * yj * row[j]
        return Fraction(acc, self._gram_den)

    def norm(self, x: LatticePoint) -> float:
        return math.sqrt(float(self.pair_exact(x, x)))

    def dominant(self, x: LatticePoint) -> bool:
        return all(c >= 0 for c in x)

    def require_dominant(self, x: LatticePoint) -> None:
        if not self.dominant(x):
            raise NonDominant(f"lattice point {x} is not dominant")

    def orbit(self, x: LatticePoint) -> list[LatticePoint]:
        return sorted({w.apply_coords(tuple(x)) for w in self.weyl})

    def dominant_rep(self, x: LatticePoint) -> LatticePoint:
        for w in self.weyl:
            y = w.apply_coords(tuple(x))
            if all(c >= 0 for c in y):
                return y
        raise AssertionError("orbit without dominant representative")

    def root_pairing(self, x: LatticePoint, a: Vec) -> Fraction:
        return vdot(self.to_cart_exact(x), a)

    def in_positive_coroot_cone(self, x: LatticePoint) -> bool:
        return _cone_member_indep(tuple(x), list(self._cone_generators))

    def dominance_leq(self, mu: LatticePoint, lam: LatticePoint) -> bool:
        """mu <= lam in dominance order: lam - mu is a sum of positive coroots."""
        diff = tuple(l - m for l, m in zip(lam, mu))
        return self.in_positive_coroot_cone(diff)

    def star(self, x: LatticePoint) -> LatticePoint:
        """The contragredient point -w0.x (profile of the reversed distance)."""
        w0 = self.weyl[self.w0_index]
        return tuple(-c for c in w0.apply_coords(tuple(x)))

    def dominant_ball(self, radius: float) -> list[LatticePoint]:
        """All dominant lattice points with Euclidean norm <= radius."""
        bounds = []
        for a in self.simple_roots:
            bounds.append(int(math.floor(radius * math.sqrt(float(vdot(a, a))) + 1e-9)))
        out = []
        for coords in itertools.product(*(range(0, b + 1) for b in bounds)):
            if float(self.pair_exact(coords, coords)) <= radius * radius + 1e-9:
                out.append(coords)
        return sorted(out)

    def __repr__(self) -> str:
        return f"RootSystem({self.family})"


def _matmul(a: tuple[Vec, ...], b: tuple[Vec, ...]) -> tuple[Vec, ...]:
    n = len(a)
    bt = list(zip(*b))
    return tuple(
        tuple(vdot(a[i], tuple(bt[j])) for j in range(n)) for i in range(n)
    )


def _solve_fraction_system(a, b) -> list[Fraction]:
    n = len(b)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def _cone_member_indep(v: LatticePoint, gens: list[LatticePoint]) -> bool:
    """Is v a nonnegative integer combination of linearly independent gens?"""
    if all(c == 0 for c in v):
        return True
    if not gens:
        return False
    # Least-squares-free exact solve: restrict to the span of gens.
    k = len(gens)
    a = [[Fraction(sum(gi * gj for gi, gj in zip(gens[i], gens[j]))) for i in range(k)]
         for j in range(k)]
    b = [Fraction(sum(gi * vi for gi, vi in zip(gens[i], v))) for i in range(k)]
    try:
        coeffs = _solve_fraction_system(a, b)
    except StopIteration:
        return False
    # Verify the combination reproduces v exactly (v might be off-span).
    recon = [sum(coeffs[i] * gens[i][d] for i in range(k)) for d in range(len(v))]
    if any(rc != vd for rc, vd in zip(recon, v)):
        return False
    return all(c.denominator == 1 and c >= 0 for c in coeffs)


@lru_cache(maxsize=None)
def build_root_system(family: str) -> RootSystem:
    """Construct (and intern) the exact root data for one family."""
    return RootSystem(family)


# --------------------------------------------------------------------------
# q-parameters and derived exact quantities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QParams:
    """Validated panel parameters q_i > 1 and the derived tau weights."""

    family: str
    q: tuple[Fraction, ...]  # indexed by label 0..rank

    @staticmethod
    def create(rs: RootSystem, q_by_label: dict[int, Fraction | int | str]) -> "QParams":
        labels = set(range(rs.rank + 1))
        given = {int(k): Fraction(v) for k, v in q_by_label.items()}
        if set(given) != labels:
            raise ConfigError(
                f"{rs.family} needs q for labels {sorted(labels)}, got {sorted(given)}"
            )
        for i, v in given.items():
            if v <= 1:
                raise ConfigError(
                    f"thickness requires q_{i} > 1, got {v} (q = 1 is not a thick building)"
                )
        for cls in _LABEL_CLASSES[rs.family]:
            vals = {given[i] for i in cls}
            if len(vals) > 1:
                raise ConfigError(
                    f"{rs.family} regularity forces equal q on labels {cls}, got "
                    + ", ".join(f"q_{i}={given[i]}" for i in cls)
                )
        if rs.family.startswith("BC"):
            r = rs.rank
            if given[0] == given[r]:
                raise ConfigError(
                    f"{rs.family} requires q_0 != q_{r}; equal end parameters are the "
                    f"C-type family"
                )
        qp = QParams(rs.family, tuple(given[i] for i in range(rs.rank + 1)))
        # tau * tau_{2a}^2 > 1 must hold for every indivisible positive root.
        for a in rs.pos_indivisible:
            if tau_of(rs, qp, a) * tau_double(rs, qp, a) ** 2 <= 1:
                raise ConfigError(f"tau condition violated at root {a}")
        return qp

    def label(self, i: int) -> Fraction:
        return self.q[i]


def _tau_table(rs: RootSystem, q: QParams) -> dict[Vec, Fraction]:
    pos_set = set(rs.pos_roots)
    out: dict[Vec, Fraction] = {}
    for a in rs.pos_roots:
        half = vscale(Fraction(1, 2), a)
        double = vscale(Fraction(2), a)
        if half in pos_set:
            # alpha and alpha/2 both roots: tau is the affine-label parameter.
            out[a] = q.label(0)
        elif double in pos_set:
            out[a] = q.label(rs._orbit_label[a]) / q.label(0)
        else:
            out[a] = q.label(rs._orbit_label[a])
    return out


@lru_cache(maxsize=None)
def _tau_cached(rs_family: str, q: QParams) -> dict[Vec, Fraction]:
    return _tau_table(build_root_system(rs_family), q)


def tau_of(rs: RootSystem, q: QParams, a: Vec) -> Fraction:
    return _tau_cached(rs.family, q)[a]


def tau_double(rs: RootSystem, q: QParams, a: Vec) -> Fraction:
    """tau_{2a}, taken as 1 when 2a is not a root."""
    table = _tau_cached(rs.family, q)
    return table.get(vscale(Fraction(2), a), Fraction(1))


def tau_half(rs: RootSystem, q: QParams, a: Vec) -> Fraction:
    """tau_{a/2}, taken as 1 when a/2 is not a root."""
    table = _tau_cached(rs.family, q)
    return table.get(vscale(Fraction(1, 2), a), Fraction(1))


def is_standard_case(rs: RootSystem, q: QParams) -> bool:
    """Standard Plancherel range: tau_a >= 1 for every root."""
    return all(t >= 1 for t in _tau_cached(rs.family, q).values())


# --------------------------------------------------------------------------
# eta, chi0, N_lambda, saturation sets, Poincare sums
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaVector:
    """The weighted half-sum of positive roots, eta = 1/2 sum log(tau_a) a.

    Stored exactly as a map {tau value -> rational vector}, so that Weyl
    images and pairings against lattice points stay in rational arithmetic
    until a log is actually needed.
    """

    parts: tuple[tuple[Fraction, Vec], ...]  # (tau value t, vector v_t)
    ambient: int

    def pair_terms(self, rs: RootSystem, x: LatticePoint) -> dict[Fraction, Fraction]:
        """<eta, x> as a map {t -> c_t} meaning sum_t c_t * log(t)."""
        out: dict[Fraction, Fraction] = {}
        cx = rs.to_cart_exact(x)
        for t, v in self.parts:
            c = vdot(v, cx) / 2
            if c:
                out[t] = out.get(t, Fraction(0)) + c
        return {t: c for t, c in out.items() if c}

    def pair_float(self, rs: RootSystem, x: LatticePoint) -> float:
        return sum(float(c) * math.log(float(t)) for t, c in self.pair_terms(rs, x).items())

    def pair_cart(self, v) -> float:
        arr = np.asarray(v, dtype=float)
        acc = 0.0
        for t, vt in self.parts:
            acc += 0.5 * math.log(float(t)) * float(np.dot([float(c) for c in vt], arr))
        return acc

    def cart_float(self) -> np.ndarray:
        acc = np.zeros(self.ambient)
        for t, v in self.parts:
            acc += 0.5 * math.log(float(t)) * np.array([float(c) for c in v])
        return acc

    def weyl_image(self, rs: RootSystem, w: WeylElement) -> "EtaVector":
        return EtaVector(
            tuple((t, w.apply_cart(v)) for t, v in self.parts), self.ambient
        )

    def negate(self) -> "EtaVector":
        return EtaVector(
            tuple((t, vscale(Fraction(-1), v)) for t, v in self.parts), self.ambient
        )

    def equals(self, other: "EtaVector") -> bool:
        def norm(p):
            d: dict[Fraction, Vec] = {}
            for t, v in p:
                d[t] = vadd(d[t], v) if t in d else v
            return {t: v for t, v in d.items() if any(c != 0 for c in v) and t != 1}

        return norm(self.parts) == norm(other.parts)


@lru_cache(maxsize=None)
def eta(rs: RootSystem, q: QParams) -> EtaVector:
    """Exact form of the growth direction eta."""
    by_tau: dict[Fraction, Vec] = {}
    for a in rs.pos_roots:
        t = tau_of(rs, q, a)
        by_tau[t] = vadd(by_tau[t], a) if t in by_tau else a
    return EtaVector(tuple(sorted(by_tau.items())), rs.ambient)


def eta_float(rs: RootSystem, q: QParams) -> np.ndarray:
    return eta(rs, q).cart_float()


def chi0(rs: RootSystem, q: QParams, x: LatticePoint) -> Fraction:
    """Volume character chi0(x) = prod tau_a^{<x, a>}, exact on the lattice."""
    acc = Fraction(1)
    for a in rs.pos_roots:
        e = rs.root_pairing(x, a)
        if e.denominator != 1:
            raise ValueError(f"{x} pairs fractionally with root {a}")
        acc *= tau_of(rs, q, a) ** int(e)
    return acc


def chi0_float(rs: RootSystem, q: QParams, v) -> float:
    """chi0 at an arbitrary Cartesian point, via exp(2 <v, eta>)."""
    return math.exp(2.0 * eta(rs, q).pair_cart(v))


def poincare(rs: RootSystem, q: QParams, stabilizer_of: LatticePoint | None = None) -> Fraction:
    """Sum of q_w^{-1} over W, or over the stabilizer of a lattice point."""
    total = Fraction(0)
    for w in rs.weyl:
        if stabilizer_of is not None and w.apply_coords(tuple(stabilizer_of)) != tuple(
            stabilizer_of
        ):
            continue
        total += 1 / _q_w(rs, q, w)
    return total


@lru_cache(maxsize=None)
def _q_w_table(rs_family: str, q: QParams) -> dict[tuple[int, ...], Fraction]:
    rs = build_root_system(rs_family)
    out = {}
    for w in rs.weyl:
        acc = Fraction(1)
        # q_w is the product of q over the inversion set of w in the
        # indivisible positive system.
        for a in rs.pos_indivisible:
            img = w.apply_cart(a)
            if vscale(Fraction(-1), img) in set(rs.pos_indivisible):
                acc *= q.label(rs._orbit_label[a])
        out[w.word] = acc
    return out


def _q_w(rs: RootSystem, q: QParams, w: WeylElement) -> Fraction:
    return _q_w_table(rs.family, q)[w.word]


def weyl_poincare(rs: RootSystem, q: QParams) -> Fraction:
    return poincare(rs, q)


def n_lambda(rs: RootSystem, q: QParams, lam: LatticePoint) -> Fraction:
    """Sphere cardinality N_lambda, exact rational."""
    rs.require_dominant(lam)
    return _n_lambda_cached(rs, q, tuple(lam))


@lru_cache(maxsize=200_000)
def _n_lambda_cached(rs: RootSystem, q: QParams, lam: LatticePoint) -> Fraction:
    return poincare(rs, q) / poincare(rs, q, stabilizer_of=lam) * chi0(rs, q, lam)


def fraction_log(x: Fraction) -> float:
    """log of a positive rational, safe for values far outside float range."""
    if x <= 0:
        raise ValueError("fraction_log needs a positive rational")
    return math.log(x.numerator) - math.log(x.denominator)


def fraction_float(x: Fraction) -> float:
    """Rational to float, overflowing gracefully to inf."""
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def n_lambda_log(rs: RootSystem, q: QParams, lam: LatticePoint) -> float:
    return fraction_log(n_lambda(rs, q, lam))


def saturation(rs: RootSystem, lam: LatticePoint) -> set[LatticePoint]:
    """Saturation set: all Weyl images of dominant points below lam."""
    rs.require_dominant(lam)
    return set(_saturation_cached(rs, tuple(lam)))


@lru_cache(maxsize=65536)
def _saturation_cached(rs: RootSystem, lam: LatticePoint) -> frozenset[LatticePoint]:
    out: set[LatticePoint] = set()
    rho = (1,) * rs.rank
    cap = rs.pair_exact(lam, rho)
    bound = sum(lam) * 3 + 1
    for mu in itertools.product(range(0, bound + 1), repeat=rs.rank):
        if rs.pair_exact(mu, rho) > cap:
            continue
        if rs.dominance_leq(mu, lam):
            out.update(rs.orbit(mu))
    return frozenset(out)


__all__ = [
    "FAMILIES",
    "LatticePoint",
    "QParams",
    "RootSystem",
    "Vec",
    "build_root_system",
    "chi0",
    "chi0_float",
    "eta",
    "eta_float",
    "is_standard_case",
    "n_lambda",
    "poincare",
    "saturation",
    "tau_double",
    "tau_half",
    "tau_of",
    "vdot",
]
