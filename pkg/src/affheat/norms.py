"""Volume-weighted lp norms of kernel profiles and their critical regions.

Sums are weighted by the sphere cardinalities, so the lp norm of a profile
equals the lp norm of the corresponding function on good vertices.  The
concentration regions come in three shapes: a ball around the drift point
n * delta_p when p < 2, an intermediate shell with a wall margin at p = 2,
and a slowly growing ball for p > 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyRegion
from .kernel import RadialFunction
from .rootsys import LatticePoint, QParams, RootSystem, n_lambda, n_lambda_log
from .walk import KappaModel, sp_delta_p

R_N_RULES = {
    "log_sq": lambda n: math.log(n) ** 2,
    "log_cube": lambda n: math.log(n) ** 3,
}


def indivisible_count(rs: RootSystem) -> int:
    return len(rs.pos_indivisible)


def default_gamma(rs: RootSystem, p: float) -> float:
    """Default region exponents.

    For p = 2 the error-balancing choice 1/(2(F+1)) is used when it stays
    inside the admissible range (0, 1/(4F)]; otherwise it is capped at the
    range boundary (which binds for F >= 2).
    """
    f = indivisible_count(rs)
    if p < 2:
        return 0.1
    if p == 2:
        return min(1.0 / (2 * (f + 1)), 1.0 / (4 * f))
    return 0.0


@dataclass(frozen=True)
class RegionSpec:
    """Parameters selecting the lp concentration region."""

    p: float
    gamma: float = 0.0
    r_n_rule: str = "log_sq"

    @staticmethod
    def create(rs: RootSystem, p: float, gamma: float | None = None,
               r_n_rule: str = "log_sq") -> "RegionSpec":
        if p < 1:
            raise ConfigError("p must be in [1, inf]")
        f = indivisible_count(rs)
        g = default_gamma(rs, p) if gamma is None else float(gamma)
        if p < 2 and not (0 < g < 1.0 / 6):
            raise ConfigError(f"gamma for p < 2 must lie in (0, 1/6), got {g}")
        if p == 2 and not (0 < g <= 1.0 / (4 * f)):
            raise ConfigError(
                f"gamma for p = 2 must lie in (0, 1/(4 F)] with F = {f}, got {g}"
            )
        if p > 2 and r_n_rule not in R_N_RULES:
            raise ConfigError(f"unknown r_n rule {r_n_rule!r}")
        return RegionSpec(p=p, gamma=g, r_n_rule=r_n_rule)

    def gamma_prime(self, rs: RootSystem) -> float:
        return 2.0 * self.gamma * indivisible_count(rs)

    def r_n(self, n: int) -> float:
        return R_N_RULES[self.r_n_rule](n)


def lp_norm(rs: RootSystem, q: QParams, k: RadialFunction, p: float) -> float:
    """(sum_lam N_lam |k(lam)|^p)^(1/p); the sup of |k| when p = inf."""
    if p == math.inf:
        return max((abs(v) for v in k.values.values()), default=0.0)
    if p < 1:
        raise ConfigError("p must be in [1, inf]")
    acc = 0.0
    for lam, v in k.values.items():
        if v:
            # Per-term evaluation in logs: sphere volumes overflow floats
            # long before the weighted terms stop being negligible.
            acc += math.exp(n_lambda_log(rs, q, lam) + p * math.log(abs(float(v))))
    return acc ** (1.0 / p)


def lp_norm_region(rs: RootSystem, q: QParams, k: RadialFunction, p: float,
                   region: set[LatticePoint], inside: bool) -> float:
    if p == math.inf:
        vals = [abs(v) for lam, v in k.values.items()
                if (lam in region) == inside]
        return max(vals, default=0.0)
    acc = 0.0
    for lam, v in k.values.items():
        if (lam in region) == inside and v:
            acc += math.exp(n_lambda_log(rs, q, lam) + p * math.log(abs(float(v))))
    return acc ** (1.0 / p)


def theoretical_rate(km: KappaModel, p: float, n: int) -> float:
    """The proved lp norm scale: polynomial factor times (rho kappa(s_p))^n."""
    if n < 2:
        raise ConfigError("rate defined for n >= 2")
    rs = km.rs
    f = indivisible_count(rs)
    if p < 2:
        pp = p / (p - 1) if p > 1 else math.inf
        s_p, _ = sp_delta_p(km, p)
        base = km.rho * km.kappa_real(s_p)
        expo = 0.0 if pp == math.inf else -rs.rank / (2 * pp)
        return n**expo * base**n
    if p == 2:
        return n ** (-rs.rank / 4 - f / 2) * km.rho**n
    return n ** (-rs.rank / 2 - f) * km.rho**n


def critical_region(spec: RegionSpec, km: KappaModel, n: int) -> set[LatticePoint]:
    """Exact enumeration of the lp concentration region at time n."""
    rs = km.rs
    p = spec.p
    if p < 2:
        _, delta_p = sp_delta_p(km, p)
        center = n * delta_p
        radius = n ** (0.5 + spec.gamma)
        pts = _lattice_ball(rs, center, radius)
    elif p == 2:
        lo = n ** (0.5 - spec.gamma)
        hi = n ** (0.5 + spec.gamma)
        wall = n ** (0.5 - spec.gamma_prime(rs))
        pts = []
        for lam in _lattice_ball(rs, np.zeros(rs.ambient), hi):
            nl = rs.norm(lam)
            if nl < lo or nl > hi:
                continue
            cart = rs.to_cart(np.asarray(lam, dtype=float))
            ok = True
            for a in rs.pos_roots:
                af = np.array([float(c) for c in a])
                if float(cart @ af) < wall:
                    ok = False
                    break
            if ok:
                pts.append(lam)
    else:
        pts = [lam for lam in _lattice_ball(rs, np.zeros(rs.ambient), spec.r_n(n))]
    region = {lam for lam in pts if rs.dominant(lam)}
    if not region:
        raise EmptyRegion(f"critical region for p={p} empty at n={n}")
    return region


def _lattice_ball(rs: RootSystem, center: np.ndarray, radius: float) -> list[LatticePoint]:
    """Dominant lattice points within Euclidean distance radius of center."""
    import itertools

    from .rootsys import vdot

    center = np.asarray(center, dtype=float)
    ranges = []
    for i, a in enumerate(rs.simple_roots):
        af = np.array([float(c) for c in a])
        mid = float(center @ af)
        slack = radius * math.sqrt(float(vdot(a, a))) + 1e-9
        lo = max(0, int(math.ceil(mid - slack)))
        hi = int(math.floor(mid + slack))
        if hi < lo:
            return []
        ranges.append(range(lo, hi + 1))
    out = []
    r2 = radius * radius + 1e-9
    for coords in itertools.product(*ranges):
        diff = rs.to_cart(np.asarray(coords, dtype=float)) - center
        if float(diff @ diff) <= r2:
            out.append(coords)
    return out


@dataclass
class ConcentrationReport:
    inside_norm: float
    outside_norm: float
    ratio: float            # outside over total
    region_size: int


def concentration_report(rs: RootSystem, q: QParams, k: RadialFunction,
                         spec: RegionSpec, km: KappaModel, n: int) -> ConcentrationReport:
    region = critical_region(spec, km, n)
    inside = lp_norm_region(rs, q, k, spec.p, region, inside=True)
    outside = lp_norm_region(rs, q, k, spec.p, region, inside=False)
    total = lp_norm(rs, q, k, spec.p)
    return ConcentrationReport(
        inside_norm=inside, outside_norm=outside,
        ratio=outside / total if total else 0.0,
        region_size=len(region),
    )


@dataclass
class RateFit:
    slope: float
    intercept: float
    drift: float            # max absolute residual of the fit


def rate_fit(km: KappaModel, kernels: dict[int, RadialFunction], p: float,
             *, drift_corrected: bool = False) -> RateFit:
    """Regress log(norm / geometric factor) against log n.

    The geometric factor is (rho kappa(s_p))^n, which is rho^n for p >= 2.
    With drift_corrected, a vanishing 1/n regressor absorbs the leading
    finite-time correction so the asymptotic slope is read off directly.
    """
    rs, q = km.rs, km.q
    if p < 2:
        s_p, _ = sp_delta_p(km, p)
        base = km.rho * km.kappa_real(s_p)
    else:
        base = km.rho
    xs, ys, ns = [], [], []
    for n in sorted(kernels):
        norm = lp_norm(rs, q, kernels[n], p)
        if norm <= 0:
            continue
        xs.append(math.log(n))
        ys.append(math.log(norm) - n * math.log(base))
        ns.append(n)
    return fit_loglog(xs, ys, ns if drift_corrected else None)


def fit_loglog(xs, ys, ns=None) -> RateFit:
    cols = [xs, np.ones(len(xs))]
    if ns is not None:
        cols.append([1.0 / n for n in ns])
    a = np.vstack(cols).T
    sol, *_ = np.linalg.lstsq(a, np.asarray(ys), rcond=None)
    resid = np.asarray(ys) - a @ sol
    return RateFit(slope=float(sol[0]), intercept=float(sol[1]),
                   drift=float(np.max(np.abs(resid))))


__all__ = [
    "ConcentrationReport",
    "RateFit",
    "RegionSpec",
    "concentration_report",
    "critical_region",
    "default_gamma",
    "fit_loglog",
    "indivisible_count",
    "lp_norm",
    "lp_norm_region",
    "rate_fit",
    "theoretical_rate",
]
