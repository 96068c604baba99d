"""Isotropic walk models: kappa, spectral radius, Hessians, Legendre transform.

A walk is a finitely supported probability vector over dominant lattice
points.  Its normalized Gelfand transform kappa is an exponential
polynomial with positive coefficients; the drift domain is the interior
of the convex hull of its exponents, and the rate function is the
Legendre transform of log kappa, computed by a damped Newton solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDirection,
    NewtonDiverged,
    OutsideHull,
)
from .rootsys import (
    LatticePoint,
    QParams,
    RootSystem,
    eta,
    n_lambda,
)
from .spectral import spherical_expoly


@dataclass(frozen=True)
class WalkSpec:
    """Finite-support isotropic walk: dominant lattice point -> weight."""

    coeffs: tuple[tuple[LatticePoint, Fraction], ...]

    @staticmethod
    def create(rs: RootSystem, coeffs: dict[LatticePoint, Fraction | int | str]) -> "WalkSpec":
        items = []
        total = Fraction(0)
        for lam, c in sorted(coeffs.items()):
            lam = tuple(int(x) for x in lam)
            rs.require_dominant(lam)
            c = Fraction(c)
            if c <= 0:
                raise ConfigError(f"walk coefficient at {lam} must be positive")
            items.append((lam, c))
            total += c
        if total != 1:
            raise ConfigError(f"walk coefficients must sum to 1 exactly, got {total}")
        return WalkSpec(tuple(items))

    @property
    def support(self) -> list[LatticePoint]:
        return [lam for lam, _ in self.coeffs]

    def coeff(self, lam: LatticePoint) -> Fraction:
        for mu, c in self.coeffs:
            if mu == lam:
                return c
        return Fraction(0)

    def max_radius(self, rs: RootSystem) -> float:
        return max(rs.norm(lam) for lam, _ in self.coeffs)


@dataclass(frozen=True)
class AdmissibilityReport:
    irreducible: bool
    aperiodic: bool
    period: int
    horizon: int


def certify_admissible(rs: RootSystem, q: QParams, walk: WalkSpec,
                       horizon: int = 40) -> AdmissibilityReport:
    """Computed (not assumed) aperiodicity and irreducibility certificates.

    Aperiodicity: gcd of return times to the origin within the horizon.
    Irreducibility: the Weyl orbits of the reachable support must span the
    coweight lattice as a group.
    """
    from .kernel import build_structure_table, heat_recursive_profiles

    reach_rad = walk.max_radius(rs) * (horizon / 2 + 1) + 1
    table = build_structure_table(rs, q, lam_radius=reach_rad, walk=walk)
    profiles = heat_recursive_profiles(rs, q, walk, horizon, table=table, exact=False)
    return_times = [n for n in range(1, horizon + 1)
                    if profiles[n].values.get(rs.zero(), 0.0) > 1e-300]
    period = 0
    for n in return_times:
        period = math.gcd(period, n)
    aperiodic = period == 1
    span_vectors: set[LatticePoint] = set()
    for prof in profiles[1:]:
        for lam in prof.values:
            if prof.values[lam] > 1e-300:
                span_vectors.update(rs.orbit(lam))
    irreducible = _spans_lattice(rs, sorted(span_vectors))
    return AdmissibilityReport(irreducible, aperiodic, period or 0, horizon)


def _spans_lattice(rs: RootSystem, vectors: list[LatticePoint]) -> bool:
    if not vectors:
        return False
    m = np.array(vectors, dtype=object).reshape(len(vectors), rs.rank)
    # Integer row reduction (Hermite-style) to check full-index span.
    rows = [list(map(int, row)) for row in m]
    rank = 0
    det = 1
    for col in range(rs.rank):
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            return False
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        # gcd-reduce below the pivot
        for i in range(rank + 1, len(rows)):
            while rows[i][col] != 0:
                f = rows[rank][col] // rows[i][col] if rows[i][col] != 0 else 0
                rows[rank] = [a - f * b for a, b in zip(rows[rank], rows[i])]
                rows[rank], rows[i] = rows[i], rows[rank]
        det *= rows[rank][col]
        rank += 1
    return abs(det) == 1


# --------------------------------------------------------------------------
# kappa model
# --------------------------------------------------------------------------


@dataclass
class KappaModel:
    """Normalized Gelfand transform of a walk, with hull and Hessian data."""

    rs: RootSystem
    q: QParams
    walk: WalkSpec
    rho: float
    exponents: np.ndarray      # [m x ambient] Cartesian exponent vectors
    exp_coords: list[LatticePoint]
    coeffs: np.ndarray         # positive, kappa(z) = sum c e^{<z,v>}
    hull_vertices: np.ndarray  # vertices of conv(exponents) in span coords
    basis: np.ndarray          # orthonormal basis of the root span [r x ambient]

    # -- evaluation -----------------------------------------------------------

    def kappa(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        vals = self.coeffs * np.exp(self.exponents @ z)
        return complex(np.sum(vals))

    def kappa_real(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.coeffs * np.exp(self.exponents @ x)))

    def kappa_on_nodes(self, thetas: np.ndarray) -> np.ndarray:
        """kappa(i theta) over rows of thetas."""
        return (self.coeffs * np.exp(1j * (thetas @ self.exponents.T))).sum(axis=1)

    def grad_log_kappa(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        w = self.coeffs * np.exp(self.exponents @ x)
        w /= np.sum(w)
        return w @ self.exponents

    def hessian_log_kappa(self, x) -> np.ndarray:
        """Hessian of log kappa at x, in the orthonormal span basis."""
        x = np.asarray(x, dtype=float)
        w = self.coeffs * np.exp(self.exponents @ x)
        w /= np.sum(w)
        e = self.exponents @ self.basis.T  # span coordinates
        mean = w @ e
        cov = (e * w[:, None]).T @ e - np.outer(mean, mean)
        return cov

    # -- hull geometry ----------------------------------------------------------

    def hull_margin(self, delta) -> float:
        """Distance from delta to the hull boundary (negative if outside)."""
        d = self.basis @ np.asarray(delta, dtype=float)
        return _polytope_margin(self.hull_vertices, d)

    def span_coords(self, v) -> np.ndarray:
        return self.basis @ np.asarray(v, dtype=float)


def build_kappa(rs: RootSystem, q: QParams, walk: WalkSpec) -> KappaModel:
    """Assemble rho and the exponential polynomial kappa = rho^{-1} sum c P."""
    from .spectral import ground_state

    rho = 0.0
    term_map: dict[LatticePoint, float] = {}
    for lam, c in walk.coeffs:
        ep = spherical_expoly(rs, q, lam)
        nl = float(n_lambda(rs, q, lam))
        rho += float(c) * sum(ep.terms.values()) / nl
        for mu, coeff in ep.terms.items():
            term_map[mu] = term_map.get(mu, 0.0) + float(c) * coeff / nl
    coords = sorted(term_map)
    exps = np.array([[float(x) for x in rs.to_cart_exact(mu)] for mu in coords])
    coeffs = np.array([term_map[mu] / rho for mu in coords])
    basis = _orthonormal_span_basis(rs)
    span_pts = exps @ basis.T
    hull = _convex_hull_vertices(span_pts)
    km = KappaModel(
        rs=rs, q=q, walk=walk, rho=rho, exponents=exps, exp_coords=coords,
        coeffs=coeffs, hull_vertices=hull, basis=basis,
    )
    assert abs(km.kappa_real(np.zeros(rs.ambient)) - 1.0) < 1e-12
    return km


def _orthonormal_span_basis(rs: RootSystem) -> np.ndarray:
    vecs = np.array([[float(c) for c in a] for a in rs.simple_roots])
    qm, _ = np.linalg.qr(vecs.T)
    return qm.T[: rs.rank]


def _convex_hull_vertices(pts: np.ndarray) -> np.ndarray:
    if pts.shape[1] == 1:
        return np.array([[pts[:, 0].min()], [pts[:, 0].max()]])
    # Andrew monotone chain in the plane.
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    p = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for pt in p:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 1e-14:
            lower.pop()
        lower.append(pt)
    upper: list[np.ndarray] = []
    for pt in reversed(p):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 1e-14:
            upper.pop()
        upper.append(pt)
    return np.array(lower[:-1] + upper[:-1])


def _polytope_margin(vertices: np.ndarray, point: np.ndarray) -> float:
    if vertices.shape[1] == 1:
        lo, hi = float(vertices.min()), float(vertices.max())
        return min(point[0] - lo, hi - point[0])
    margins = []
    n = len(vertices)
    centroid = vertices.mean(axis=0)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        edge = b - a
        normal = np.array([edge[1], -edge[0]])
        nn = np.linalg.norm(normal)
        if nn < 1e-15:
            continue
        normal /= nn
        if np.dot(normal, centroid - a) > 0:
            normal = -normal
        margins.append(-np.dot(normal, point - a))
    return min(margins)


def hessian(km: KappaModel, x) -> np.ndarray:
    """Positive-definite Hessian form of log kappa at x (span basis).

    Raises DegenerateDirection when the walk's exponents do not affinely
    span the root space (for example the lazy walk).
    """
    b = km.hessian_log_kappa(np.asarray(x, dtype=float))
    eigmin = float(np.linalg.eigvalsh(b)[0])
    if eigmin <= 1e-13 * max(1.0, float(np.linalg.eigvalsh(b)[-1])):
        raise DegenerateDirection(
            "walk exponents do not affinely span; log kappa has a flat direction"
        )
    return b


def hessian_double_sum(km: KappaModel, x, u) -> float:
    """The equivalent pairwise form 1/2 sum p_v p_w <u, v-w>^2 (cross-check)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = km.coeffs * np.exp(km.exponents @ x)
    w /= np.sum(w)
    diffs = km.exponents @ u
    acc = 0.0
    for i, wi in enumerate(w):
        acc += 0.5 * wi * float(np.sum(w * (diffs[i] - diffs) ** 2))
    return acc


def saddle(km: KappaModel, delta, *, margin: float = 1e-9,
           tol: float = 1e-12, max_iter: int = 500) -> tuple[np.ndarray, float]:
    """Maximize <s, delta> - log kappa(s); returns (s, rate value).

    delta must lie in the hull interior with the stated margin.  Newton
    iterations with Armijo damping; gradient fallback if the Hessian is
    ill-conditioned.  Near the hull boundary the maximizer runs far out,
    so steps are capped and non-finite trials rejected.
    """
    delta = np.asarray(delta, dtype=float)
    if km.hull_margin(delta) < margin:
        raise OutsideHull(
            f"drift {delta} is within {margin} of the exponent hull boundary"
        )
    d = km.span_coords(delta)
    s = np.zeros(km.rs.rank)
    e_span = km.exponents @ km.basis.T
    # Shift exponents by the largest kappa term to keep exp() in range.

    def weights_at(sv):
        logs = np.log(km.coeffs) + e_span @ sv
        logs -= np.max(logs)
        w = np.exp(logs)
        return w / np.sum(w), float(np.max(np.log(km.coeffs) + e_span @ sv))

    def f(sv):
        logs = np.log(km.coeffs) + e_span @ sv
        top = np.max(logs)
        return float(np.dot(sv, d)) - (top + math.log(float(np.sum(np.exp(logs - top)))))

    def grad(sv):
        w, _ = weights_at(sv)
        return d - w @ e_span

    for _ in range(max_iter):
        g = grad(s)
        if np.linalg.norm(g) <= tol:
            break
        w, _ = weights_at(s)
        mean = w @ e_span
        cov = (e_span * w[:, None]).T @ e_span - np.outer(mean, mean)
        try:
            step = np.linalg.solve(cov, g)
            if not np.all(np.isfinite(step)):
                step = g
        except np.linalg.LinAlgError:
            step = g
        cap = 50.0
        sn = float(np.linalg.norm(step))
        if sn > cap:
            step = step * (cap / sn)
        if np.linalg.norm(g) < 1e-5:
            # Quadratic convergence region: damping only stalls on the
            # float resolution of f, so take the full Newton step.
            s = s + step
            continue
        t, f0 = 1.0, f(s)
        gdot = float(np.dot(g, step))
        slack = 1e-13 * max(1.0, abs(f0))
        accepted = False
        for _ in range(80):
            trial = f(s + t * step)
            if math.isfinite(trial) and trial >= f0 + 0.1 * t * gdot - slack:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise NewtonDiverged("line search failed in saddle solve")
        s = s + t * step
    else:
        raise NewtonDiverged(
            f"saddle solve did not reach tolerance {tol} in {max_iter} iterations"
        )
    s_cart = km.basis.T @ s
    phi = float(np.dot(s_cart, delta)) - math.log(km.kappa_real(s_cart))
    return s_cart, phi


def rate_function(km: KappaModel, delta, **kw) -> float:
    return saddle(km, delta, **kw)[1]


def sp_delta_p(km: KappaModel, p: float) -> tuple[np.ndarray, np.ndarray]:
    """The spectral base point s_p and its drift delta_p = grad log kappa(s_p)."""
    if p < 1:
        raise ConfigError("p must be at least 1")
    ev = eta(km.rs, km.q).cart_float()
    s_p = ev * (2.0 / p - 1.0) if p < 2 else np.zeros(km.rs.ambient)
    delta_p = km.grad_log_kappa(s_p)
    if km.hull_margin(delta_p) <= 0:
        raise AssertionError("delta_p fell outside the open drift domain")
    return s_p, delta_p


__all__ = [
    "AdmissibilityReport",
    "KappaModel",
    "WalkSpec",
    "build_kappa",
    "certify_admissible",
    "hessian",
    "hessian_double_sum",
    "rate_function",
    "saddle",
    "sp_delta_p",
]
