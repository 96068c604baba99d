"""Spherical harmonic analysis: c-function, spherical functions, Plancherel grid.

The spherical function of a dominant lattice point lam is evaluated two
ways: a Weyl sum weighted by the c-function (fast, vectializable, singular
on a null set), and an exponential polynomial with positive coefficients
recovered by discrete Fourier inversion (valid everywhere, and the carrier
of exact integer vertex counts).  The Plancherel quadrature samples the
full character torus of the coweight lattice with the inverse squared
modulus of the c-function as density; its normalization is validated, not
assumed, via total mass and orthogonality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (
    ExceptionalCaseUnsupported,
    ExtractionFailed,
    ResolutionCapExceeded,
    SingularPoint,
)
from .rootsys import (
    LatticePoint,
    QParams,
    RootSystem,
    chi0,
    eta,
    is_standard_case,
    n_lambda,
    poincare,
    saturation,
    tau_half,
    tau_of,
    vdot,
)

_DEFAULT_RESOLUTION = {"A1": 512, "BC1": 512, "A2": 192, "B2": 160, "C2": 160,
                       "BC2": 160, "G2": 128}


# --------------------------------------------------------------------------
# c-function
# --------------------------------------------------------------------------


def c_function(rs: RootSystem, q: QParams, z, *, singular_tol: float = 1e-14) -> complex:
    """Product over positive roots of the spectral c-factor at z (Cartesian)."""
    z = np.asarray(z, dtype=complex)
    acc = complex(1.0)
    for a, av in zip(rs.pos_roots, rs.coroots):
        u = complex(np.dot(z, np.array([float(c) for c in av], dtype=float)))
        th = 1.0 / math.sqrt(float(tau_half(rs, q, a)))
        e = np.exp(-u)
        den = 1.0 - th * e
        if abs(den) < singular_tol:
            raise SingularPoint(f"c-function denominator vanishes at root {a}")
        num = 1.0 - (1.0 / float(tau_of(rs, q, a))) * th * e
        acc *= num / den
    return acc


def c_function_grouped(rs: RootSystem, q: QParams, z) -> complex:
    """Same value, grouped over indivisible roots (cross-check form)."""
    z = np.asarray(z, dtype=complex)
    acc = complex(1.0)
    for a in rs.pos_indivisible:
        av = np.array([float(c) for c in rs.coroots[rs.pos_roots.index(a)]])
        half = np.exp(-0.5 * complex(np.dot(z, av)))
        ta = float(tau_of(rs, q, a))
        t2 = float(tau_double(rs, q, a))
        num = (1.0 - half / (t2 * math.sqrt(ta))) * (1.0 + half / math.sqrt(ta))
        den = 1.0 - half * half
        if abs(den) < 1e-14:
            raise SingularPoint(f"grouped c-function singular at root {a}")
        acc *= num / den
    return acc


from .rootsys import tau_double  # noqa: E402  (needed by grouped form)


# --------------------------------------------------------------------------
# exponential polynomials
# --------------------------------------------------------------------------


@dataclass
class ExpPoly:
    """Finite map exponent -> coefficient, exponents in coweight coordinates."""

    terms: dict[LatticePoint, float]
    counts: dict[LatticePoint, int] | None = None  # certified integer counts

    def eval_pairings(self, t) -> complex:
        """Evaluate with t_j = <z, lam_j> given (length-r complex vector)."""
        t = np.asarray(t, dtype=complex)
        acc = 0.0 + 0.0j
        for mu, c in self.terms.items():
            acc += c * np.exp(complex(np.dot(t, np.asarray(mu, dtype=float))))
        return acc

    def eval_cart(self, rs: RootSystem, z) -> complex:
        z = np.asarray(z, dtype=complex)
        t = [complex(np.dot(z, rs.coweight_cart_matrix()[j])) for j in range(rs.rank)]
        return self.eval_pairings(t)

    def scaled(self, factor: float) -> "ExpPoly":
        return ExpPoly({mu: c * factor for mu, c in self.terms.items()}, None)

    def to_json(self) -> list[dict]:
        out = []
        for mu in sorted(self.terms):
            rec = {"mu": list(mu), "coeff": self.terms[mu],
                   "count": None if self.counts is None else self.counts[mu]}
            out.append(rec)
        return out

    @staticmethod
    def from_json(data: list[dict]) -> "ExpPoly":
        terms = {tuple(rec["mu"]): float(rec["coeff"]) for rec in data}
        counts = None
        if all(rec.get("count") is not None for rec in data):
            counts = {tuple(rec["mu"]): int(rec["count"]) for rec in data}
        return ExpPoly(terms, counts)


# --------------------------------------------------------------------------
# spherical functions
# --------------------------------------------------------------------------


def _chi0_sqrt_float(rs: RootSystem, q: QParams, x: LatticePoint) -> float:
    return math.exp(eta(rs, q).pair_float(rs, x))


def spherical_direct(rs: RootSystem, q: QParams, lam: LatticePoint, z) -> complex:
    """Weyl-sum evaluation of the spherical function at generic z."""
    z = np.asarray(z, dtype=complex)
    pref = 1.0 / (_chi0_sqrt_float(rs, q, lam) * float(poincare(rs, q)))
    lam_cart = np.array([float(c) for c in rs.to_cart_exact(lam)])
    acc = 0.0 + 0.0j
    for w in rs.weyl:
        mw = np.array([[float(c) for c in row] for row in w.matrix])
        wz = mw @ z
        acc += c_function(rs, q, wz) * np.exp(complex(np.dot(wz, lam_cart)))
    return pref * acc


@lru_cache(maxsize=256)
def _phases_for_dft(rs: RootSystem, q: QParams, m: int):
    nodes, _ = _dft_nodes(rs, m)
    return _phases_for_nodes(rs, q, nodes)


def _phases_for_nodes(rs: RootSystem, q: QParams, nodes: np.ndarray):
    """Per-Weyl-element c-values and coweight pairings over a node array.

    nodes holds Cartesian theta rows; the spectral point is z = i * theta.
    Returns a list of (U_w, C_w) with U_w[k, j] = <w theta_k, lam_j> and
    C_w[k] = c(i w theta_k).
    """
    cw = rs.coweight_cart_matrix()  # rows lam_j
    data = []
    for w in rs.weyl:
        mw = np.array([[float(c) for c in row] for row in w.matrix])
        wn = nodes @ mw.T
        u = wn @ cw.T
        cvals = _c_on_imaginary(rs, q, wn)
        data.append((u, cvals))
    return data


def _c_on_imaginary(rs: RootSystem, q: QParams, thetas: np.ndarray) -> np.ndarray:
    """Vectorized c(i theta) over rows of thetas."""
    acc = np.ones(len(thetas), dtype=complex)
    for a, av in zip(rs.pos_roots, rs.coroots):
        avf = np.array([float(c) for c in av])
        u = thetas @ avf
        th = 1.0 / math.sqrt(float(tau_half(rs, q, a)))
        e = np.exp(-1j * u)
        den = 1.0 - th * e
        num = 1.0 - (1.0 / float(tau_of(rs, q, a))) * th * e
        acc *= num / den
    return acc


def _inv_c_sq_on_imaginary(rs: RootSystem, q: QParams, thetas: np.ndarray) -> np.ndarray:
    """1 / |c(i theta)|^2, computed pole-free as products of |den|^2 / |num|^2."""
    acc = np.ones(len(thetas))
    for a, av in zip(rs.pos_roots, rs.coroots):
        avf = np.array([float(c) for c in av])
        u = thetas @ avf
        th = 1.0 / math.sqrt(float(tau_half(rs, q, a)))
        e = np.exp(-1j * u)
        den = np.abs(1.0 - th * e) ** 2
        num = np.abs(1.0 - (1.0 / float(tau_of(rs, q, a))) * th * e) ** 2
        acc *= den / num
    return acc


# --------------------------------------------------------------------------
# exponential polynomial extraction (offset DFT over the coweight torus)
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _coord_spread(rs: RootSystem, lam: LatticePoint) -> int:
    # Coordinates are linear, so the max over the saturation polytope is
    # attained on the Weyl orbit of lam itself.
    return max(max(abs(c) for c in mu) for mu in rs.orbit(tuple(lam)))


def _wall_safe_offsets(rs: RootSystem, m: int) -> np.ndarray:
    """Fractional grid offsets keeping every node off the c-function walls."""
    patterns = []
    for av in rs.coroots:
        pat = []
        for a in rs.simple_roots:
            val = vdot(a, av)
            assert val.denominator == 1
            pat.append(int(val))
        patterns.append(tuple(pat))
    base = np.array([0.5 + 0.061803398875 * (j + 1) for j in range(rs.rank)])
    for attempt in range(32):
        off = (base + attempt * 0.0137) % 1.0
        ok = True
        for pat in patterns:
            shift = float(np.dot(off, pat))
            # Node combinations hit integer multiples of m only when the
            # fractional part of the offset pairing is ~0.
            frac = abs(shift - round(shift))
            if frac < 0.05:
                ok = False
                break
        if ok:
            return off
    raise AssertionError("could not find wall-safe offsets")


@lru_cache(maxsize=256)
def _dft_nodes_cached(rs: RootSystem, m: int):
    nodes, off = _dft_nodes_build(rs, m)
    nodes.setflags(write=False)
    return nodes, off


def _dft_nodes(rs: RootSystem, m: int) -> tuple[np.ndarray, np.ndarray]:
    return _dft_nodes_cached(rs, m)


def _dft_nodes_build(rs: RootSystem, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampling nodes theta = 2 pi sum_j ((k_j + off_j)/m) alpha_j."""
    off = _wall_safe_offsets(rs, m)
    ks = np.stack(
        np.meshgrid(*[np.arange(m)] * rs.rank, indexing="ij"), axis=-1
    ).reshape(-1, rs.rank)
    simple = np.array(
        [[float(c) for c in a] for a in rs.simple_roots]
    )
    frac = (ks + off) / m
    nodes = 2.0 * math.pi * (frac @ simple)
    return nodes, off


def spherical_expoly(
    rs: RootSystem,
    q: QParams,
    lam: LatticePoint,
    *,
    resolution: int | None = None,
    certify: bool = True,
    residual_tol: float = 1e-6,
) -> ExpPoly:
    """Exponential polynomial of N_lam * P_lam, coefficients m(mu) chi0(mu)^{1/2}.

    Coefficients are recovered by an offset DFT of the Weyl-sum evaluation
    at imaginary spectral points.  When certify is set, each coefficient
    divided by chi0(mu)^{1/2} must round to a nonnegative integer (the
    vertex count); a residual above residual_tol raises ExtractionFailed.
    """
    rs.require_dominant(lam)
    return _spherical_expoly_cached(rs, q, tuple(lam), resolution, certify, residual_tol)


@lru_cache(maxsize=4096)
def _spherical_expoly_cached(
    rs: RootSystem, q: QParams, lam: LatticePoint, resolution, certify, residual_tol
) -> ExpPoly:
    spread = _coord_spread(rs, lam)
    m = resolution or max(8, 2 * spread + 5)
    nodes, off = _dft_nodes(rs, m)
    pdata = _phases_for_dft(rs, q, m)
    # Sample N_lam P_lam(i theta_k) over the offset lattice.
    nl = float(n_lambda(rs, q, lam))
    pref = nl / (_chi0_sqrt_float(rs, q, lam) * float(poincare(rs, q)))
    lam_f = np.asarray(lam, dtype=float)
    vals = np.zeros(len(nodes), dtype=complex)
    for u, cvals in pdata:
        vals += cvals * np.exp(1j * (u @ lam_f))
    vals *= pref
    # Forward DFT with offset unwinding: the coefficient of exponent mu sits
    # at frequency index mu mod m, twisted by the fractional offset phase.
    grid_vals = vals.reshape((m,) * rs.rank)
    coeffs = np.fft.fftn(grid_vals) / (m**rs.rank)
    sat = saturation(rs, lam)
    chi_sqrt = {mu: _chi0_sqrt_float(rs, q, mu) for mu in sat}
    terms: dict[LatticePoint, float] = {}
    counts: dict[LatticePoint, int] = {}
    for mu in sat:
        idx = tuple(c % m for c in mu)
        phase = np.exp(-2j * math.pi * float(np.dot(off, np.asarray(mu) / m)))
        c = complex(coeffs[idx] * phase)
        raw_count = c.real / chi_sqrt[mu]
        rounded = round(raw_count)
        if certify:
            resid = abs(raw_count - rounded) + abs(c.imag / chi_sqrt[mu])
            if resid > residual_tol or rounded < 0:
                raise ExtractionFailed(
                    f"count at {mu} did not certify: value {raw_count}, "
                    f"residual {resid:.2e} (resolution {m})"
                )
        if abs(c.real) > 1e-9 * max(1.0, chi_sqrt[mu]) or (certify and rounded > 0):
            if certify:
                if rounded > 0:
                    terms[mu] = rounded * chi_sqrt[mu]
                    counts[mu] = int(rounded)
            else:
                terms[mu] = c.real
    if certify:
        total = sum(counts.values())
        nl_exact = n_lambda(rs, q, lam)
        if nl_exact.denominator != 1 or total != int(nl_exact):
            raise ExtractionFailed(
                f"counts sum {total} != N_lambda {nl_exact} at {lam}"
            )
        return ExpPoly(terms, counts)
    return ExpPoly(terms, None)


def spherical_eval(rs: RootSystem, q: QParams, lam: LatticePoint, z) -> complex:
    """Singularity-free evaluation of P_lam via its exponential polynomial."""
    ep = spherical_expoly(rs, q, lam)
    return ep.eval_cart(rs, z) / float(n_lambda(rs, q, lam))


def ground_state(rs: RootSystem, q: QParams, lam: LatticePoint, *,
                 certify: bool | None = None) -> float:
    """P_lam evaluated at the spectral origin, in (0, 1]."""
    rs.require_dominant(lam)
    if certify is None:
        # Counts scale like chi0(lam); certify only while the rounding
        # residual of a count-sized float stays safely below tolerance.
        certify = float(chi0(rs, q, lam)) < 2.0**22
    ep = _spherical_expoly_cached(rs, q, tuple(lam), None, certify, 1e-6)
    total = sum(ep.terms.values())
    return total / float(n_lambda(rs, q, lam))


# --------------------------------------------------------------------------
# Plancherel quadrature grid
# --------------------------------------------------------------------------


@dataclass
class SpectralGrid:
    """Quadrature nodes on the character torus with Plancherel weights."""

    rs: RootSystem
    q: QParams
    resolution: int
    nodes: np.ndarray          # [N x ambient] Cartesian theta rows
    weights: np.ndarray        # [N], positive, sums to 1
    mass_rescale: float        # recorded ratio against the naive constant
    offsets: np.ndarray
    orthogonality_residual: float
    check_radius: float
    _pdata: list = field(default_factory=list, repr=False)

    def spherical_matrix(self, lams: list[LatticePoint], *, conj: bool = False,
                         scaled: bool = False) -> np.ndarray:
        """Rows of P_lam(i theta) over the grid (or the chi0-normalized rows).

        With scaled=True the row for lam is N_lam P_lam(i theta) / chi0^{1/2},
        whose amplitude stays polynomial in |lam|.
        """
        out = np.empty((len(lams), len(self.nodes)), dtype=complex)
        wq = float(poincare(self.rs, self.q))
        for i, lam in enumerate(lams):
            lam_f = np.asarray(lam, dtype=float)
            acc = np.zeros(len(self.nodes), dtype=complex)
            for u, cvals in self._pdata:
                acc += cvals * np.exp(1j * (u @ lam_f))
            if scaled:
                ratio = poincare(self.rs, self.q) / poincare(
                    self.rs, self.q, stabilizer_of=lam
                )
                acc *= float(ratio) / wq
            else:
                acc /= _chi0_sqrt_float(self.rs, self.q, lam) * wq
            out[i] = np.conj(acc) if conj else acc
        return out

    def pairing(self, lam: LatticePoint, mu: LatticePoint) -> complex:
        """<P_lam, P_mu> against the Plancherel weights."""
        pl = self.spherical_matrix([lam])[0]
        pm = self.spherical_matrix([mu])[0]
        return complex(np.sum(self.weights * pl * np.conj(pm)))

    def half_grid(self) -> "SpectralGrid":
        """Strided sub-grid used for Richardson-style error estimates."""
        return build_grid(self.rs, self.q, resolution=self.resolution // 2,
                          check_radius=0.0)


def _torus_nodes(rs: RootSystem, m: int) -> tuple[np.ndarray, np.ndarray]:
    return _dft_nodes(rs, m)


def build_grid(
    rs: RootSystem,
    q: QParams,
    resolution: int | None = None,
    *,
    check_radius: float = 6.0,
    mass_tol: float = 1e-8,
    orth_tol: float = 1e-8,
    max_doublings: int = 3,
) -> SpectralGrid:
    """Construct and validate the Plancherel quadrature.

    Total mass is normalized to 1 by construction (the identity inversion
    forces it); orthogonality against sphere volumes is then a genuine
    validation.  On failure the resolution is doubled up to a cap.
    """
    if not is_standard_case(rs, q):
        raise ExceptionalCaseUnsupported(
            f"{rs.family} with these q lies in the exceptional spectral range "
            f"(some tau < 1); only the standard case is supported"
        )
    if resolution is None:
        resolution = _DEFAULT_RESOLUTION[rs.family]
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    m = resolution
    last_err = None
    for _ in range(max_doublings + 1):
        grid = _build_grid_once(rs, q, m, check_radius)
        ok, resid = _validate_grid(grid, check_radius, orth_tol)
        grid.orthogonality_residual = resid
        if ok and abs(np.sum(grid.weights) - 1.0) < mass_tol:
            return grid
        last_err = resid
        m *= 2
    raise ResolutionCapExceeded(
        f"grid validation failed up to resolution {m // 2} "
        f"(orthogonality residual {last_err:.2e})"
    )


def _build_grid_once(rs: RootSystem, q: QParams, m: int, check_radius: float) -> SpectralGrid:
    nodes, off = _torus_nodes(rs, m)
    dens = _inv_c_sq_on_imaginary(rs, q, nodes)
    # The naive normalization from the closed-form constant; the true
    # normalization comes from mass 1, with the ratio recorded.
    naive = dens * (float(poincare(rs, q)) / len(rs.weyl)) / len(dens)
    total = float(np.sum(naive))
    weights = dens / float(np.sum(dens))
    grid = SpectralGrid(
        rs=rs,
        q=q,
        resolution=m,
        nodes=nodes,
        weights=weights,
        mass_rescale=1.0 / total,
        offsets=off,
        orthogonality_residual=float("nan"),
        check_radius=check_radius,
    )
    grid._pdata = _phases_for_nodes(rs, q, nodes)
    return grid


def _validate_grid(grid: SpectralGrid, check_radius: float, orth_tol: float) -> tuple[bool, float]:
    if check_radius <= 0:
        return True, 0.0
    rs, q = grid.rs, grid.q
    lams = rs.dominant_ball(check_radius)
    p = grid.spherical_matrix(lams)
    gram = (p * grid.weights) @ np.conj(p.T)
    expected = np.diag([1.0 / float(n_lambda(rs, q, lam)) for lam in lams])
    resid = float(np.max(np.abs(gram - expected)))
    return resid <= orth_tol, resid


__all__ = [
    "ExpPoly",
    "SpectralGrid",
    "build_grid",
    "c_function",
    "c_function_grouped",
    "ground_state",
    "spherical_direct",
    "spherical_expoly",
    "spherical_eval",
]
