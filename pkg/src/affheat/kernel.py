"""Radial heat kernels by two independent routes, plus asymptotic checkers.

Route one is spectral: invert the Plancherel quadrature against powers of
the normalized Gelfand transform.  Route two is algebraic: recover the
convolution structure constants of the averaging operators by quadrature,
snap them to exact integers (a built-in correctness certificate), and run
the exact rational recursion.  The flagship test of the package is that
the two routes agree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    OutsideRegime,
    PrecisionLoss,
    RoundingFailed,
    TableIncomplete,
)
from .rootsys import (
    LatticePoint,
    QParams,
    RootSystem,
    chi0,
    eta,
    n_lambda,
    poincare,
    saturation,
)
from .spectral import SpectralGrid, build_grid, c_function, ground_state
from .walk import KappaModel, WalkSpec, saddle


@dataclass
class RadialFunction:
    """Profile of a radial function: dominant lattice point -> value."""

    values: dict[LatticePoint, float]
    truncation_radius: float | None = None
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    def support(self) -> list[LatticePoint]:
        return sorted(self.values)

    def __getitem__(self, lam: LatticePoint):
        return self.values.get(tuple(lam), 0.0)


# --------------------------------------------------------------------------
# shared grids
# --------------------------------------------------------------------------

_GRIDS: dict[tuple, SpectralGrid] = {}


def shared_grid(rs: RootSystem, q: QParams, resolution: int | None = None,
                check_radius: float = 6.0) -> SpectralGrid:
    key = (rs.family, q.q, resolution)
    if key not in _GRIDS:
        _GRIDS[key] = build_grid(rs, q, resolution, check_radius=check_radius)
    return _GRIDS[key]


# --------------------------------------------------------------------------
# structure constants
# --------------------------------------------------------------------------


class StructureTable:
    """Lazily grown table of averaging-operator products A_lam A_mu.

    Entries are exact: entry (lam, mu) maps nu to (count, weight) where
    count is the integer number of intermediate vertices and weight is the
    rational coefficient of A_nu, weight = count * N_nu / (N_lam N_mu).
    """

    def __init__(self, rs: RootSystem, q: QParams, grid: SpectralGrid,
                 residual_tol: float = 1e-6):
        self.rs = rs
        self.q = q
        self.grid = grid
        self.residual_tol = residual_tol
        self.entries: dict[tuple[LatticePoint, LatticePoint],
                           dict[LatticePoint, tuple[int, Fraction]]] = {}
        self._grids: dict[int, SpectralGrid] = {grid.resolution: grid}
        self._row_cache: dict[tuple[int, LatticePoint], np.ndarray] = {}
        self._row_cache_order: list[tuple[int, LatticePoint]] = []
        self._row_cache_max = 48 if rs.rank > 1 else 4096
        self._n_cache: dict[LatticePoint, Fraction] = {}
        self._prod_cache: dict[tuple[LatticePoint, LatticePoint],
                               dict[LatticePoint, Fraction]] = {}
        # Fourier tail of the Plancherel density decays like the smallest
        # tau; the quadrature must out-resolve the integrand's trig degree
        # by this margin to keep aliasing below the snapping tolerance.
        min_q = min(float(v) for v in q.q)
        self._alias_margin = int(math.ceil(44.0 / math.log(min_q))) + 8
        self.max_residual = 0.0

    # -- helpers ---------------------------------------------------------------

    def _n(self, lam: LatticePoint) -> Fraction:
        if lam not in self._n_cache:
            self._n_cache[lam] = n_lambda(self.rs, self.q, lam)
        return self._n_cache[lam]

    def _grid_for_degree(self, degree: int) -> SpectralGrid:
        """Smallest grid in the ladder out-resolving the given trig degree."""
        need = degree + self._alias_margin
        res = self.grid.resolution
        while res < need:
            res *= 2
        if res not in self._grids:
            self._grids[res] = build_grid(self.rs, self.q, res, check_radius=0.0)
        return self._grids[res]

    def _scaled_row(self, grid: SpectralGrid, lam: LatticePoint) -> np.ndarray:
        """N_lam P_lam(i theta) / chi0(lam)^{1/2} over the grid nodes."""
        key = (grid.resolution, lam)
        row = self._row_cache.get(key)
        if row is None:
            row = grid.spherical_matrix([lam], scaled=True)[0]
            self._row_cache[key] = row
            self._row_cache_order.append(key)
            if len(self._row_cache_order) > self._row_cache_max:
                evict = self._row_cache_order.pop(0)
                self._row_cache.pop(evict, None)
        return row

    def _candidates(self, lam: LatticePoint, mu: LatticePoint) -> list[LatticePoint]:
        """Dominant nu with |nu - lam| <= |mu| (norm bound on products)."""
        rs = self.rs
        mu_sq = rs.pair_exact(mu, mu)
        box = []
        for i, a in enumerate(rs.simple_roots):
            from .rootsys import vdot
            asq = math.sqrt(float(vdot(a, a)))
            rad = math.sqrt(float(mu_sq)) * asq
            box.append((lam[i] - int(math.floor(rad + 1e-9)),
                        lam[i] + int(math.floor(rad + 1e-9))))
        out = []
        for coords in itertools.product(*(range(lo, hi + 1) for lo, hi in box)):
            if any(c < 0 for c in coords):
                continue
            diff = tuple(c - l for c, l in zip(coords, lam))
            if rs.pair_exact(diff, diff) <= mu_sq:
                out.append(coords)
        return out

    # -- quadrature recovery -----------------------------------------------------

    def _recover_entry(self, lam: LatticePoint, mu: LatticePoint) -> dict:
        rs, q = self.rs, self.q
        if mu == rs.zero():
            return {lam: (1, Fraction(1))}
        from .spectral import _coord_spread

        degree = 2 * _coord_spread(rs, lam) + 2 * _coord_spread(rs, mu) + 2
        grid = self._grid_for_degree(degree)
        row_l = self._scaled_row(grid, lam)
        row_m = self._scaled_row(grid, mu)
        wrow = grid.weights * row_l * row_m
        ev = eta(rs, q)
        log_pref_lm = ev.pair_float(rs, lam) + ev.pair_float(rs, mu)
        entry: dict[LatticePoint, tuple[int, Fraction]] = {}
        nl, nm = self._n(lam), self._n(mu)
        for nu in self._candidates(lam, mu):
            row_n = self._scaled_row(grid, nu)
            raw = complex(np.sum(wrow * np.conj(row_n)))
            ratio_nu = poincare(rs, q) / poincare(rs, q, stabilizer_of=nu)
            pref = math.exp(log_pref_lm - ev.pair_float(rs, nu)) / float(ratio_nu)
            m_val = raw.real * pref
            resid = abs(m_val - round(m_val)) + abs(raw.imag * pref)
            self.max_residual = max(self.max_residual, resid)
            if resid > self.residual_tol:
                raise RoundingFailed(
                    f"structure count for ({lam},{mu})->{nu} has residual "
                    f"{resid:.2e} at resolution {self.grid.resolution}; "
                    f"escalate the grid"
                )
            m_int = round(m_val)
            if m_int < 0:
                raise RoundingFailed(
                    f"negative count {m_int} for ({lam},{mu})->{nu}"
                )
            if m_int:
                b = Fraction(m_int) * self._n(nu) / (nl * nm)
                entry[nu] = (m_int, b)
        total = sum(b for _, b in entry.values())
        if total != 1:
            raise RoundingFailed(
                f"structure row for ({lam},{mu}) sums to {total}, not 1"
            )
        return entry

    # -- public surface ------------------------------------------------------------

    def ensure(self, pairs) -> None:
        for lam, mu in pairs:
            key = (tuple(lam), tuple(mu))
            if key not in self.entries:
                self.entries[key] = self._recover_entry(*key)

    def entry(self, lam: LatticePoint, mu: LatticePoint, *, ensure: bool = False) -> dict:
        key = (tuple(lam), tuple(mu))
        if key not in self.entries:
            if not ensure:
                raise TableIncomplete(f"no structure entry for {key}")
            self.entries[key] = self._recover_entry(*key)
        return self.entries[key]

    def weights_row(self, lam: LatticePoint, mu: LatticePoint) -> dict[LatticePoint, Fraction]:
        return {nu: b for nu, (m, b) in self.entry(lam, mu, ensure=True).items()}

    # -- algebra products via generator expansion ---------------------------------

    def generator_list(self) -> list[LatticePoint]:
        rank = self.rs.rank
        return [tuple(int(i == j) for j in range(rank)) for i in range(rank)]

    def multiply_basis(self, lam: LatticePoint, mu: LatticePoint) -> dict[LatticePoint, Fraction]:
        """Coefficients of A_lam A_mu in the A-basis, exact, via generators.

        Large mu products are expanded recursively through fundamental
        generators, so only generator rows ever require quadrature.  The
        recursion descends strictly in dominance order and is cached.
        """
        return self._m_operator(tuple(lam), tuple(mu))

    def _mult_by_gen(self, vec: dict[LatticePoint, Fraction], gen: LatticePoint) -> dict:
        out: dict[LatticePoint, Fraction] = {}
        for x, coef in vec.items():
            for nu, b in self.weights_row(x, gen).items():
                out[nu] = out.get(nu, Fraction(0)) + coef * b
        return {k: v for k, v in out.items() if v}

    def _m_operator(self, lam: LatticePoint, target: LatticePoint) -> dict[LatticePoint, Fraction]:
        key = (lam, target)
        hit = self._prod_cache.get(key)
        if hit is not None:
            return hit
        if all(c == 0 for c in target):
            res = {lam: Fraction(1)}
        else:
            i = next(j for j, c in enumerate(target) if c > 0)
            gen = tuple(int(j == i) for j in range(self.rs.rank))
            prev = tuple(c - int(j == i) for j, c in enumerate(target))
            prod = self._mult_by_gen(self._m_operator(lam, prev), gen)
            row = self.weights_row(prev, gen)
            top_b = row.get(target)
            if not top_b:
                raise RoundingFailed(
                    f"leading coefficient missing in generator row {prev} x {gen}"
                )
            for nu, b in row.items():
                if nu == target:
                    continue
                for k, v in self._m_operator(lam, nu).items():
                    prod[k] = prod.get(k, Fraction(0)) - b * v
            res = {k: v / top_b for k, v in prod.items() if v}
        self._prod_cache[key] = res
        return res

    def product_row(self, lam: LatticePoint, mu: LatticePoint) -> dict[LatticePoint, Fraction]:
        """A_lam A_mu in the A-basis; generator rows by quadrature, the rest
        by exact expansion (no quadrature on large counts)."""
        lam, mu = tuple(lam), tuple(mu)
        if mu == self.rs.zero():
            return {lam: Fraction(1)}
        if sum(mu) == 1:
            return self.weights_row(lam, mu)
        return self.multiply_basis(lam, mu)


_TABLES: dict[tuple, StructureTable] = {}


def build_structure_table(rs: RootSystem, q: QParams, *, lam_radius: float = 0.0,
                          walk: WalkSpec | None = None,
                          resolution: int | None = None) -> StructureTable:
    """Shared structure table for (family, q); rows grow lazily."""
    grid = shared_grid(rs, q, resolution)
    key = (rs.family, q.q, grid.resolution)
    if key not in _TABLES:
        _TABLES[key] = StructureTable(rs, q, grid)
    table = _TABLES[key]
    if lam_radius > 0 and walk is not None:
        lams = rs.dominant_ball(lam_radius)
        table.ensure((lam, mu) for lam in lams for mu in walk.support
                     if mu != rs.zero())
    return table


def structure_constants(grid: SpectralGrid, lam: LatticePoint, mu: LatticePoint,
                        *, residual_tol: float = 1e-6) -> dict[LatticePoint, Fraction]:
    """Single product row A_lam A_mu = sum b^nu A_nu, exact after snapping."""
    rs, q = grid.rs, grid.q
    rs.require_dominant(tuple(lam))
    rs.require_dominant(tuple(mu))
    table = StructureTable(rs, q, grid, residual_tol)
    # Guard: counts can reach N_mu, which must stay well inside float range.
    scale = float(min(n_lambda(rs, q, lam), n_lambda(rs, q, mu)))
    if scale * 1e-14 > residual_tol:
        raise RoundingFailed(
            f"counts up to {scale:.1e} cannot be certified at residual "
            f"{residual_tol}; use the generator expansion route"
        )
    return {nu: b for nu, (m, b) in table.entry(tuple(lam), tuple(mu), ensure=True).items()}


# --------------------------------------------------------------------------
# recursive (exact) route
# --------------------------------------------------------------------------


def _avec_to_profile(rs: RootSystem, q: QParams, avec: dict, *, exact: bool) -> RadialFunction:
    from .rootsys import fraction_float

    vals = {}
    for lam, a in avec.items():
        if exact:
            vals[lam] = a / n_lambda(rs, q, lam)
        else:
            nl = fraction_float(n_lambda(rs, q, lam))
            vals[lam] = float(a) / nl if math.isfinite(nl) else 0.0
    return RadialFunction(values=vals)


def heat_recursive_profiles(rs: RootSystem, q: QParams, walk: WalkSpec, n_max: int,
                            *, table: StructureTable | None = None,
                            exact: bool = True,
                            start_avec: dict | None = None,
                            wanted: list[int] | None = None) -> list[RadialFunction] | dict[int, RadialFunction]:
    """Kernel profiles for n = 0..n_max by exact (or float) convolution.

    The float mode keeps every operation a positive sum, so values stay
    relatively accurate at any depth; the exact mode returns rationals.
    With `wanted` given, only those times are materialized (returned as a
    dict), which avoids per-step volume arithmetic on long runs.
    """
    if table is None:
        table = build_structure_table(rs, q)
    one = Fraction(1) if exact else 1.0
    avec = start_avec if start_avec is not None else {rs.zero(): one}
    if not exact:
        avec = {k: float(v) for k, v in avec.items()}
    want = None if wanted is None else set(wanted)
    picked: dict[int, RadialFunction] = {}
    out = []
    if want is None:
        out.append(_avec_to_profile(rs, q, avec, exact=exact))
    elif 0 in want:
        picked[0] = _avec_to_profile(rs, q, avec, exact=exact)
    gens = set(table.generator_list()) | {rs.zero()}
    trans_cache: dict[LatticePoint, list[tuple[LatticePoint, object]]] = {}

    def transitions(lam: LatticePoint):
        hit = trans_cache.get(lam)
        if hit is None:
            acc: dict[LatticePoint, Fraction] = {}
            for mu, c in walk.coeffs:
                if mu == rs.zero():
                    acc[lam] = acc.get(lam, Fraction(0)) + c
                elif mu in gens:
                    for nu, b in table.weights_row(lam, mu).items():
                        acc[nu] = acc.get(nu, Fraction(0)) + c * b
                else:
                    for nu, b in table.multiply_basis(lam, mu).items():
                        acc[nu] = acc.get(nu, Fraction(0)) + c * b
            hit = [(nu, b if exact else float(b)) for nu, b in acc.items()]
            trans_cache[lam] = hit
        return hit

    zero = Fraction(0) if exact else 0.0
    for step in range(1, n_max + 1):
        new: dict[LatticePoint, object] = {}
        for lam, a in avec.items():
            for nu, b in transitions(lam):
                new[nu] = new.get(nu, zero) + a * b
        avec = new
        if want is None:
            out.append(_avec_to_profile(rs, q, avec, exact=exact))
        elif step in want:
            picked[step] = _avec_to_profile(rs, q, avec, exact=exact)
    return out if want is None else picked


def heat_recursive(table: StructureTable, walk: WalkSpec, n: int) -> RadialFunction:
    """Exact rational kernel profile at time n (the algebraic route)."""
    profiles = heat_recursive_profiles(table.rs, table.q, walk, n, table=table,
                                       exact=True)
    return profiles[n]


# --------------------------------------------------------------------------
# spectral route
# --------------------------------------------------------------------------


def heat_spectral(km: KappaModel, grid: SpectralGrid, n: int,
                  lam_set, *, rtol: float = 1e-3,
                  on_imprecise: str = "raise",
                  precision: str = "double", dps: int = 45) -> RadialFunction:
    """Kernel profile at time n by Plancherel inversion of kappa^n.

    Values, per dominant lam, are rho^n sum_theta w kappa(i theta)^n
    conj(P_lam(i theta)).  A Richardson comparison against the strided
    half grid plus a roundoff floor estimates the relative error per lam;
    points above rtol raise PrecisionLoss (or are masked/kept on request).
    """
    lam_set = [tuple(x) for x in lam_set]
    if n == 0:
        vals = {lam: 1.0 if all(c == 0 for c in lam) else 0.0 for lam in lam_set}
        return RadialFunction(values=vals, meta={"route": "spectral", "n": 0})
    if precision == "extended":
        return _heat_spectral_mp(km, grid, n, lam_set, dps=dps)
    series = heat_spectral_series(km, grid, [n], lam_set, rtol=rtol,
                                  on_imprecise=on_imprecise)
    return series[0]


def heat_spectral_series(km: KappaModel, grid: SpectralGrid, ns: list[int],
                         lam_set, *, rtol: float = 1e-3,
                         on_imprecise: str = "raise",
                         chunk: int = 256) -> list[RadialFunction]:
    """Spectral kernel profiles for several times, sharing one matrix build.

    Lattice points are processed in chunks to bound the working set of
    spherical-function rows.
    """
    from .spectral import _coord_spread

    rs, q = grid.rs, grid.q
    lam_set = [tuple(x) for x in lam_set]
    kap = km.kappa_on_nodes(grid.nodes)
    half_idx = _half_indices(rs.rank, grid.resolution)
    halfw = grid.weights[half_idx]
    halfw = halfw / np.sum(halfw)
    kpow = {n: kap**n for n in ns}
    # Alias model: the Plancherel density's Fourier tail decays at rate
    # log(min q)/2 per frequency step; the integrand's trig degree is the
    # walk's reach at time n plus the spread of the evaluated point.
    y_decay = 0.5 * math.log(min(float(v) for v in q.q))
    kappa_spread = max(max(abs(c) for c in v) for v in km.exp_coords)
    out = [RadialFunction(values={}, meta={"route": "spectral", "n": n,
                                           "imag_residue": 0.0, "resolved": {},
                                           "rel_error_estimate": {}})
           for n in ns]
    for start in range(0, len(lam_set), chunk):
        lams = lam_set[start:start + chunk]
        pbar = grid.spherical_matrix(lams, conj=True)
        pw = pbar * grid.weights
        scale = np.abs(pbar) @ grid.weights
        floor = 8e-16 * scale
        spreads = np.array([_coord_spread(rs, lam) for lam in lams])
        for rf, n in zip(out, ns):
            kn = kpow[n]
            raw = pw @ kn
            degree = n * kappa_spread + spreads
            margin = np.maximum(grid.resolution - degree, 0.0)
            alias = np.exp(-y_decay * margin) * scale
            est = (alias + floor) / np.maximum(np.abs(raw), 1e-300)
            # Richardson cross-check where the strided half grid still
            # out-resolves the integrand.
            if np.any(degree + 20 < grid.resolution // 2):
                raw_half = (pbar[:, half_idx] * halfw) @ kn[half_idx]
                rich = np.abs(raw - raw_half) / np.maximum(np.abs(raw), 1e-300)
                use = degree + 20 < grid.resolution // 2
                est = np.where(use, np.maximum(np.minimum(rich, est),
                                               floor / np.maximum(np.abs(raw), 1e-300)),
                               est)
            vals = km.rho**n * raw
            rf.meta["imag_residue"] = max(
                rf.meta["imag_residue"],
                float(np.max(np.abs(vals.imag))) if len(vals) else 0.0,
            )
            bad = est > rtol
            for i, lam in enumerate(lams):
                rf.meta["rel_error_estimate"][lam] = float(est[i])
                if bad[i] and on_imprecise == "raise":
                    raise PrecisionLoss(
                        f"spectral value at {lam}, n={n} has estimated relative "
                        f"error {est[i]:.2e} > {rtol}"
                    )
                rf.meta["resolved"][lam] = not bad[i]
                if bad[i] and on_imprecise == "mask":
                    continue
                rf.values[lam] = float(vals[i].real)
    return out


def _half_indices(rank: int, m: int) -> np.ndarray:
    if rank == 1:
        return np.arange(0, m, 2)
    grid_idx = np.arange(m * m).reshape(m, m)
    return grid_idx[::2, ::2].ravel()


def _mp_eta_pairing(rs: RootSystem, q: QParams, x: LatticePoint, mp):
    """<eta, x> in working precision from the exact tau decomposition."""
    terms = eta(rs, q).pair_terms(rs, tuple(x))
    acc = mp.mpf(0)
    for t, c in terms.items():
        acc += mp.mpf(c.numerator) / c.denominator * mp.log(
            mp.mpf(t.numerator) / t.denominator
        )
    return acc


def _heat_spectral_mp(km: KappaModel, grid: SpectralGrid, n: int,
                      lam_set, *, dps: int) -> RadialFunction:
    """Extended-precision spectral route (small lattices and node counts).

    All inputs are rebuilt from exact data (rationals and certified integer
    counts), so accuracy is limited by the working precision, not by any
    double-precision intermediate.
    """
    import mpmath as mp

    from .rootsys import tau_half as _tauh, tau_of as _tauo
    from .spectral import spherical_expoly

    rs, q = grid.rs, grid.q
    with mp.workdps(dps):
        m = grid.resolution
        off = [mp.mpf(float(o)) for o in grid.offsets]
        simple = [[Fraction(c) for c in a] for a in rs.simple_roots]
        nodes = []
        for ks in itertools.product(range(m), repeat=rs.rank):
            th = [mp.mpf(0)] * rs.ambient
            for j in range(rs.rank):
                fac = 2 * mp.pi * (ks[j] + off[j]) / m
                for d in range(rs.ambient):
                    c = simple[j][d]
                    th[d] += fac * mp.mpf(c.numerator) / c.denominator
            nodes.append(th)

        def frac_mp(x: Fraction):
            return mp.mpf(x.numerator) / x.denominator

        root_data = []
        for a, av in zip(rs.pos_roots, rs.coroots):
            root_data.append((
                [frac_mp(Fraction(c)) for c in av],
                1 / mp.sqrt(frac_mp(_tauh(rs, q, a))),
                1 / frac_mp(_tauo(rs, q, a)),
            ))

        def c_at(th):
            acc = mp.mpc(1)
            for avf, thalf, tinv in root_data:
                u = sum(t * c for t, c in zip(th, avf))
                e = mp.e**(-1j * u)
                acc *= (1 - tinv * thalf * e) / (1 - thalf * e)
            return acc

        dens = []
        for th in nodes:
            acc = mp.mpf(1)
            for avf, thalf, tinv in root_data:
                u = sum(t * c for t, c in zip(th, avf))
                e = mp.e**(-1j * u)
                acc *= abs(1 - thalf * e) ** 2 / abs(1 - tinv * thalf * e) ** 2
            dens.append(acc)
        total = sum(dens)
        weights = [d / total for d in dens]

        # kappa rebuilt from certified integer counts: exact inputs only.
        rho_mp = mp.mpf(0)
        term_map: dict[LatticePoint, object] = {}
        for lam, c in km.walk.coeffs:
            ep = spherical_expoly(rs, q, lam)
            assert ep.counts is not None
            nl = frac_mp(n_lambda(rs, q, lam))
            cf = frac_mp(c)
            for mu, cnt in ep.counts.items():
                coeff = cnt * mp.e ** _mp_eta_pairing(rs, q, mu, mp) * cf / nl
                term_map[mu] = term_map.get(mu, mp.mpf(0)) + coeff
                rho_mp += coeff
        exp_carts = {
            mu: [frac_mp(Fraction(c)) for c in rs.to_cart_exact(mu)]
            for mu in term_map
        }
        kap_pow = []
        for th in nodes:
            acc = mp.mpc(0)
            for mu, cf in term_map.items():
                phase = sum(t * x for t, x in zip(th, exp_carts[mu]))
                acc += cf * mp.e**(1j * phase)
            kap_pow.append((acc / rho_mp) ** n)

        # c(w i theta) and w theta pairings, once per (node, Weyl element)
        weyl_mats = [
            [[frac_mp(Fraction(x)) for x in row] for row in w.matrix]
            for w in rs.weyl
        ]
        wthetas = []
        cvals = []
        for th in nodes:
            per_w = []
            per_c = []
            for mat in weyl_mats:
                wth = [sum(mat[i][j] * th[j] for j in range(rs.ambient))
                       for i in range(rs.ambient)]
                per_w.append(wth)
                per_c.append(c_at(wth))
            wthetas.append(per_w)
            cvals.append(per_c)

        wq = frac_mp(poincare(rs, q))
        values = {}
        rho_n = rho_mp**n
        for lam in lam_set:
            lam = tuple(lam)
            lam_cart = [frac_mp(Fraction(c)) for c in rs.to_cart_exact(lam)]
            chi_s = mp.e ** _mp_eta_pairing(rs, q, lam, mp)
            acc = mp.mpc(0)
            for th_i in range(len(nodes)):
                pv = mp.mpc(0)
                for w_i in range(len(rs.weyl)):
                    phase = sum(t * x for t, x in zip(wthetas[th_i][w_i], lam_cart))
                    pv += cvals[th_i][w_i] * mp.e**(1j * phase)
                acc += weights[th_i] * kap_pow[th_i] * mp.conj(pv)
            values[lam] = float(mp.re(acc) * rho_n / (chi_s * wq))
        return RadialFunction(values=values,
                              meta={"route": "spectral-mp", "n": n, "dps": dps})


def heat_l2_norm_sq_spectral(km: KappaModel, grid: SpectralGrid, n: int) -> float:
    """||k_n||_2^2 for symmetric walks, via the return probability at 2n."""
    sym = all(km.walk.coeff(km.rs.star(lam)) == c for lam, c in km.walk.coeffs)
    if not sym:
        raise OutsideRegime("l2 shortcut requires a symmetric walk")
    kap = km.kappa_on_nodes(grid.nodes)
    val = float(np.sum(grid.weights * (kap.real ** (2 * n))))
    return km.rho ** (2 * n) * val


# --------------------------------------------------------------------------
# asymptotic formula evaluators and ratio checks
# --------------------------------------------------------------------------


def _indivisible_count(rs: RootSystem) -> int:
    return len(rs.pos_indivisible)


def asym_interior(km: KappaModel, n: int, lam: LatticePoint, *,
                  wall_margin: float = 0.05, hull_margin: float = 0.02) -> float:
    """Interior local-limit formula without its undetermined constant."""
    rs, q = km.rs, km.q
    rs.require_dominant(tuple(lam))
    delta = km.rs.to_cart(np.asarray(lam, dtype=float)) / n
    for a in rs.pos_roots:
        af = np.array([float(c) for c in a])
        if float(delta @ af) < wall_margin:
            raise OutsideRegime(f"drift pairing with root {a} below {wall_margin}")
    if km.hull_margin(delta) < hull_margin:
        raise OutsideRegime("drift too close to the exponent hull boundary")
    s, phi = saddle(km, delta)
    bmat = km.hessian_log_kappa(s)
    det_b = float(np.linalg.det(bmat))
    cval = c_function(rs, q, s.astype(complex)).real
    chi_inv_sqrt = math.exp(-eta(rs, q).pair_float(rs, tuple(lam)))
    return (n ** (-rs.rank / 2) * km.rho**n * math.exp(-n * phi)
            * chi_inv_sqrt / math.sqrt(det_b) / cval)


def asym_origin(km: KappaModel, n: int, lam: LatticePoint, *,
                max_drift: float = 0.2) -> float:
    """Near-origin local-limit formula without its undetermined constant."""
    rs, q = km.rs, km.q
    rs.require_dominant(tuple(lam))
    delta = rs.to_cart(np.asarray(lam, dtype=float)) / n
    if float(np.linalg.norm(delta)) > max_drift:
        raise OutsideRegime(f"|lam|/n exceeds {max_drift}")
    _, phi = saddle(km, delta)
    f = _indivisible_count(rs)
    return (n ** (-rs.rank / 2 - f) * km.rho**n * math.exp(-n * phi)
            * ground_state(rs, q, tuple(lam)))


@dataclass
class RatioCheck:
    ratio: float
    reference: float
    deviation: float


def ratio_interior(kern: RadialFunction, km: KappaModel, n: int,
                   lam: LatticePoint, xi: LatticePoint, *,
                   wall_margin: float = 0.05, hull_margin: float = 0.02) -> RatioCheck:
    """Interior two-point ratio against chi0^{-1/2}(xi) e^{-<s_n, xi>}."""
    rs, q = km.rs, km.q
    lam, xi = tuple(lam), tuple(xi)
    lam2 = tuple(a + b for a, b in zip(lam, xi))
    rs.require_dominant(lam)
    rs.require_dominant(lam2)
    delta = rs.to_cart(np.asarray(lam, dtype=float)) / n
    for a in rs.pos_roots:
        af = np.array([float(c) for c in a])
        if float(delta @ af) < wall_margin:
            raise OutsideRegime("wall margin violated")
    if km.hull_margin(delta) < hull_margin:
        raise OutsideRegime("hull margin violated")
    v1, v2 = kern[lam], kern[lam2]
    if v1 <= 0 or v2 <= 0:
        raise OutsideRegime("kernel vanishes at the requested points")
    s, _ = saddle(km, delta)
    xi_cart = rs.to_cart(np.asarray(xi, dtype=float))
    ref = math.exp(-eta(rs, q).pair_float(rs, xi)) * math.exp(-float(s @ xi_cart))
    ratio = v2 / v1
    return RatioCheck(ratio=ratio, reference=ref, deviation=abs(ratio - ref))


def ratio_origin(kern: RadialFunction, km: KappaModel, n: int,
                 lam: LatticePoint, mu: LatticePoint, *,
                 max_drift: float = 0.2) -> RatioCheck:
    """Near-origin two-point ratio against the ground-state ratio."""
    rs, q = km.rs, km.q
    lam, mu = tuple(lam), tuple(mu)
    rs.require_dominant(lam)
    rs.require_dominant(mu)
    for x in (lam, mu):
        if rs.norm(x) / n > max_drift:
            raise OutsideRegime("points too far out for the origin regime")
    v1, v2 = kern[lam], kern[mu]
    if v1 <= 0 or v2 <= 0:
        raise OutsideRegime("kernel vanishes at the requested points")
    ref = ground_state(rs, q, mu) / ground_state(rs, q, lam)
    ratio = v2 / v1
    return RatioCheck(ratio=ratio, reference=ref, deviation=abs(ratio - ref))


__all__ = [
    "RadialFunction",
    "RatioCheck",
    "StructureTable",
    "asym_interior",
    "asym_origin",
    "build_structure_table",
    "heat_l2_norm_sq_spectral",
    "heat_recursive",
    "heat_recursive_profiles",
    "heat_spectral",
    "heat_spectral_series",
    "ratio_interior",
    "ratio_origin",
    "shared_grid",
    "structure_constants",
]
