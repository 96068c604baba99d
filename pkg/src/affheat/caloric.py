"""Radial Helgason transform, mass functionals, and caloric evolution.

A caloric state is a radial profile evolved by the walk.  For radial data
the mass functional is the Helgason transform evaluated at the real base
point s_p, and the central convergence statement is that u_n approaches
mass * k_n in every volume-weighted lp norm, at a p-dependent rate.  The
convolution inequalities at the end (domination principle and the
convolution l2 * lp -> l2 phenomenon) are exercised numerically on exact
convolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import OutOfStrip, TailBoundFailed
from .kernel import RadialFunction, StructureTable, heat_recursive_profiles
from .norms import RegionSpec, fit_loglog, lp_norm, lp_norm_region
from .rootsys import LatticePoint, QParams, RootSystem, eta, n_lambda, poincare
from .spectral import SpectralGrid, ground_state, spherical_eval
from .walk import KappaModel, WalkSpec


@dataclass
class CaloricState:
    profile: RadialFunction
    n: int
    datum_ref: str


@dataclass(frozen=True)
class WeightedNormSpec:
    """Weight rule for the l1(w_p) classes of initial data."""

    p: float

    def weight(self, rs: RootSystem, q: QParams, lam: LatticePoint) -> float:
        pairing = eta(rs, q).pair_float(rs, tuple(lam))
        return math.exp((2.0 / self.p) * pairing if self.p < 2 else pairing)


# --------------------------------------------------------------------------
# Helgason transform and mass
# --------------------------------------------------------------------------


def _strip_parameter(rs: RootSystem, q: QParams, z) -> float:
    """Check Re z lies on the segment [-eta, eta]; return its parameter."""
    z = np.asarray(z, dtype=complex)
    re = z.real
    ev = eta(rs, q).cart_float()
    denom = float(ev @ ev)
    if denom == 0:
        raise OutOfStrip("eta vanishes; no admissible strip")
    t = float(re @ ev) / denom
    if np.linalg.norm(re - t * ev) > 1e-9 or abs(t) > 1 + 1e-12:
        raise OutOfStrip(f"Re z = {re} is not on the segment [-eta, eta]")
    return t


def helgason_radial(rs: RootSystem, q: QParams, f: RadialFunction, z) -> complex:
    """Transform of a radial profile: sum N_lam f(lam) P_lam(-z)."""
    _strip_parameter(rs, q, z)
    z = np.asarray(z, dtype=complex)
    acc = 0.0 + 0.0j
    for lam, v in f.values.items():
        if v:
            acc += float(n_lambda(rs, q, lam)) * float(v) * spherical_eval(rs, q, lam, -z)
    return acc


def l1_profile_norm(rs: RootSystem, q: QParams, f: RadialFunction) -> float:
    return sum(float(n_lambda(rs, q, lam)) * abs(float(v))
               for lam, v in f.values.items())


def mass(km: KappaModel, f: RadialFunction, p: float) -> float:
    """Mass functional of a radial profile: sum N f P_lam(s_p)."""
    rs, q = km.rs, km.q
    ev = eta(rs, q).cart_float()
    s_p = ev * (2.0 / p - 1.0) if p < 2 else np.zeros(rs.ambient)
    acc = 0.0
    for lam, v in f.values.items():
        if v:
            acc += float(n_lambda(rs, q, lam)) * float(v) * spherical_eval(
                rs, q, lam, s_p.astype(complex)).real
    return acc


# --------------------------------------------------------------------------
# evolution
# --------------------------------------------------------------------------


def profile_avec(rs: RootSystem, q: QParams, f: RadialFunction, *, exact: bool):
    out = {}
    for lam, v in f.values.items():
        if v:
            nv = n_lambda(rs, q, lam)
            out[tuple(lam)] = v * nv if exact else float(v) * float(nv)
    return out


def evolve(km: KappaModel, f: RadialFunction, n: int, *,
           table: StructureTable | None = None,
           grid: SpectralGrid | None = None,
           route: str = "table", exact: bool = False,
           datum_ref: str = "datum") -> CaloricState:
    """Evolve a radial profile n steps.

    Route "table" convolves with the exact structure constants; route
    "spectral" inverts the multiplier (rho kappa)^n applied to the
    transform of f on the quadrature grid.
    """
    rs, q = km.rs, km.q
    if route == "table":
        start = profile_avec(rs, q, f, exact=exact)
        profs = heat_recursive_profiles(rs, q, km.walk, n, table=table,
                                        exact=exact, start_avec=start)
        return CaloricState(profile=profs[n], n=n, datum_ref=datum_ref)
    if route != "spectral":
        raise ValueError(f"unknown route {route!r}")
    assert grid is not None
    support = _reachable_support(rs, km.walk, f, n, table)
    lam_list = sorted(support)
    pmat = grid.spherical_matrix(lam_list)            # rows P_lam(i theta)
    fvec = np.zeros(len(grid.nodes), dtype=complex)
    for lam, v in f.values.items():
        if v:
            row = grid.spherical_matrix([tuple(lam)])[0]
            fvec += float(v) * float(n_lambda(rs, q, lam)) * row
    kap = km.kappa_on_nodes(grid.nodes)
    integ = grid.weights * (kap**n) * fvec
    vals = km.rho**n * (np.conj(pmat) @ integ)
    profile = RadialFunction(values={lam: float(vals[i].real)
                                     for i, lam in enumerate(lam_list)},
                             meta={"route": "spectral", "n": n,
                                   "imag_residue": float(np.max(np.abs(vals.imag)))
                                   if len(vals) else 0.0})
    return CaloricState(profile=profile, n=n, datum_ref=datum_ref)


def _reachable_support(rs: RootSystem, walk: WalkSpec, f: RadialFunction,
                       n: int, table: StructureTable | None) -> set[LatticePoint]:
    rad = max((rs.norm(lam) for lam in f.values), default=0.0)
    rad += n * walk.max_radius(rs) + 1e-9
    return set(rs.dominant_ball(rad))


# --------------------------------------------------------------------------
# convolution via the structure table
# --------------------------------------------------------------------------


def radial_convolve(table: StructureTable, f: RadialFunction, g: RadialFunction,
                    *, exact: bool = True) -> RadialFunction:
    """Exact radial convolution f x g through operator products."""
    rs, q = table.rs, table.q
    out: dict[LatticePoint, object] = {}
    for lam, fv in f.values.items():
        if not fv:
            continue
        for mu, gv in g.values.items():
            if not gv:
                continue
            scale = fv * gv * n_lambda(rs, q, lam) * n_lambda(rs, q, mu)
            for nu, b in table.product_row(tuple(lam), tuple(mu)).items():
                out[nu] = out.get(nu, Fraction(0)) + scale * b
    vals = {}
    for nu, a in out.items():
        v = a / n_lambda(rs, q, nu)
        vals[nu] = v if exact else float(v)
    return RadialFunction(values=vals)


# --------------------------------------------------------------------------
# convergence measurements
# --------------------------------------------------------------------------


def profile_difference(u: RadialFunction, k: RadialFunction, massval: float) -> RadialFunction:
    keys = set(u.values) | set(k.values)
    return RadialFunction(values={
        lam: float(u.values.get(lam, 0.0)) - massval * float(k.values.get(lam, 0.0))
        for lam in keys
    })


def convergence_error(rs: RootSystem, q: QParams,
                      u_series: dict[int, RadialFunction],
                      k_series: dict[int, RadialFunction],
                      massval: float, p: float) -> dict[int, float]:
    """err_n = ||u_n - mass * k_n||_p / ||k_n||_p over the common times."""
    out = {}
    for n in sorted(set(u_series) & set(k_series)):
        diff = profile_difference(u_series[n], k_series[n], massval)
        denom = lp_norm(rs, q, k_series[n], p)
        out[n] = lp_norm(rs, q, diff, p) / denom if denom else math.inf
    return out


def convergence_slope(errors: dict[int, float]) -> float:
    xs = [math.log(n) for n, e in sorted(errors.items()) if e > 0]
    ys = [math.log(e) for n, e in sorted(errors.items()) if e > 0]
    return fit_loglog(xs, ys).slope


def region_split_error(rs: RootSystem, q: QParams, km: KappaModel,
                       u: RadialFunction, k: RadialFunction, massval: float,
                       spec: RegionSpec, n: int) -> tuple[float, float]:
    """(inside error, outside u-norm), both normalized by ||k_n||_p."""
    from .norms import critical_region

    region = critical_region(spec, km, n)
    diff = profile_difference(u, k, massval)
    denom = lp_norm(rs, q, k, spec.p)
    inside = lp_norm_region(rs, q, diff, spec.p, region, inside=True) / denom
    outside = lp_norm_region(rs, q, u, spec.p, region, inside=False) / denom
    return inside, outside


def weighted_membership(rs: RootSystem, q: QParams, f: RadialFunction,
                        p: float) -> tuple[bool, float, float]:
    """(member flag, weighted norm of the truncated profile, shell ratio).

    The flag extrapolates the tail geometrically from the outermost shells,
    which is what matters for synthetic heavy-tail profiles truncated at a
    finite radius; finitely supported data is always a member.
    """
    spec = WeightedNormSpec(p)
    shells: dict[int, float] = {}
    norm = 0.0
    width = min(
        rs.norm(tuple(int(i == j) for j in range(rs.rank))) for i in range(rs.rank)
    )
    for lam, v in f.values.items():
        if not v:
            continue
        term = float(n_lambda(rs, q, lam)) * abs(float(v)) * spec.weight(rs, q, lam)
        norm += term
        shell = int(round(rs.norm(lam) / width))
        shells[shell] = shells.get(shell, 0.0) + term
    order = sorted(shells)
    if len(order) < 4:
        return True, norm, 0.0
    tail = [shells[s] for s in order[-3:]]
    ratios = [tail[i + 1] / tail[i] for i in range(2) if tail[i] > 0]
    ratio = max(ratios) if ratios else 0.0
    return ratio < 1.0 - 1e-9, norm, ratio


# --------------------------------------------------------------------------
# convolution inequalities
# --------------------------------------------------------------------------


def herz_check(table: StructureTable, km: KappaModel, f: RadialFunction,
               k_conv: RadialFunction, p: float) -> float:
    """Margin of the domination bound ||f x K||_p <= H(|K|)(s_p) ||f||_p."""
    rs, q = table.rs, table.q
    conv = radial_convolve(table, f, k_conv, exact=False)
    lhs = lp_norm(rs, q, conv, p)
    abs_k = RadialFunction(values={lam: abs(float(v)) for lam, v in k_conv.values.items()})
    bound = mass(km, abs_k, p) * lp_norm(rs, q, f, p)
    return bound - lhs


def ground_state_lp_norm(rs: RootSystem, q: QParams, pp: float, *,
                         head_radius: float = 25.0) -> tuple[float, float]:
    """||ground state||_{l^pp} with a certified envelope tail bound.

    Returns (head value, tail bound).  The tail uses the boundedness
    envelope chi0^{-1/2} * prod(1 + <alpha, lam>) with the constant fitted
    on the computed head, and requires a summable shell ratio.
    """
    if pp <= 2.0 + 1e-9:
        raise TailBoundFailed(
            f"ground-state l^{pp} norm is not certifiably finite for exponent <= 2"
        )
    head_pts = rs.dominant_ball(head_radius)
    head = 0.0
    env_const = 0.0
    ev = eta(rs, q)
    for lam in head_pts:
        gs = ground_state(rs, q, lam)
        head += float(n_lambda(rs, q, lam)) * gs**pp
        env = math.exp(-ev.pair_float(rs, lam))
        for a in rs.pos_indivisible:
            env *= 1.0 + float(rs.root_pairing(lam, a))
        env_const = max(env_const, gs / env)
    env_const *= 1.5  # headroom on the fitted envelope constant
    ratio_bound = poincare(rs, q)  # N_lam <= W(1/q) chi0(lam)
    shell = int(head_radius) + 1
    tail = 0.0
    prev_term = None
    while True:
        pts = [lam for lam in rs.dominant_ball(shell + 1.0)
               if rs.norm(lam) > shell - 1e-9]
        term = 0.0
        for lam in pts:
            pairing = ev.pair_float(rs, lam)
            env = env_const * math.exp(-pairing)
            for a in rs.pos_indivisible:
                env *= 1.0 + float(rs.root_pairing(lam, a))
            term += float(ratio_bound) * math.exp(2 * pairing) * env**pp
        tail += term
        if prev_term is not None and prev_term > 0:
            r = term / prev_term
            if r >= 0.9:
                raise TailBoundFailed(
                    f"shell ratio {r:.3f} does not certify a geometric tail"
                )
            if term < 1e-18 * max(head, 1e-300):
                tail += term * r / (1 - r)
                break
        if term == 0.0:
            break
        prev_term = term
        shell += 1
        if shell > head_radius + 400:
            raise TailBoundFailed("tail did not certify within the shell budget")
    return head ** (1.0 / pp), tail ** (1.0 / pp)


def kunze_stein_constant(rs: RootSystem, q: QParams, p: float) -> float:
    """The convolution constant ||ground state||_{p'} for p in [1, 2)."""
    if not 1 <= p < 2:
        raise TailBoundFailed("the l2 convolution bound needs p in [1, 2)")
    pp = p / (p - 1) if p > 1 else math.inf
    if pp == math.inf:
        return 1.0
    return _ks_constant_cached(rs, q, pp)


from functools import lru_cache


@lru_cache(maxsize=64)
def _ks_constant_cached(rs: RootSystem, q: QParams, pp: float) -> float:
    radius = 25.0 if rs.rank == 1 else 14.0
    head, _tail = ground_state_lp_norm(rs, q, pp, head_radius=radius)
    return head


def kunze_stein_check(table: StructureTable, km: KappaModel, f: RadialFunction,
                      k_conv: RadialFunction, p: float) -> float:
    """Margin of ||f x K||_2 <= C_p ||K||_p ||f||_2 for radial data."""
    rs, q = table.rs, table.q
    conv = radial_convolve(table, f, k_conv, exact=False)
    lhs = lp_norm(rs, q, conv, 2.0)
    c_p = kunze_stein_constant(rs, q, p)
    bound = c_p * lp_norm(rs, q, k_conv, p) * lp_norm(rs, q, f, 2.0)
    return bound - lhs


__all__ = [
    "CaloricState",
    "WeightedNormSpec",
    "convergence_error",
    "convergence_slope",
    "evolve",
    "ground_state_lp_norm",
    "helgason_radial",
    "herz_check",
    "kunze_stein_check",
    "kunze_stein_constant",
    "l1_profile_norm",
    "mass",
    "profile_avec",
    "profile_difference",
    "radial_convolve",
    "region_split_error",
    "weighted_membership",
]
