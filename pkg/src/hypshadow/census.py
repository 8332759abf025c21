"""Periodic-point census and hyperbolic entropy estimates.

P_n counts points with f^n(x) = x (period dividing n).  Each detected
point carries its minimal period, multipliers and an invariant splitting
from the period product, from which (K, a)-hyperbolicity is decided for a
whole sweep of (K, a) at once.

The (K, a) test used here: for j = 1..P at every point of the orbit,

    |Df^j restricted to E^s| <= K^{-1} e^{-j a},
    co-norm of Df^j on E^u   >= K e^{j a},

so that K -> 0 relaxes both sides.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur
from scipy.spatial import cKDTree

from .errors import DegenerateCount, NeutralMultiplier
from .mapmodel import MapModel, integer_det, torus_delta, torus_dist, wrap
from .shadow import PeriodicOrbit, period_multipliers

A_GRID = (0.5, 0.3, 0.1, 0.05)
K_GRID = (0.9, 0.5, 0.1)
DEGREE_SLACK = 0.05


class NonIsolatedWarning(UserWarning):
    """Newton met a degenerate fixed-point equation: periodic points are not isolated."""


# -- exact counts ------------------------------------------------------------


def exact_count_linear(A, n: int) -> int:
    """|det(A^n - I)| in exact integer arithmetic."""
    M = [[int(v) for v in row] for row in np.asarray(A)]
    d = len(M)
    P = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(n):
        P = [[sum(P[i][k] * M[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    det = integer_det(np.array([[P[i][j] - (i == j) for j in range(d)] for i in range(d)], dtype=object))
    if det == 0:
        raise DegenerateCount(f"det(A^{n} - I) = 0: periodic points are not isolated")
    return abs(int(det))


# -- numerical search --------------------------------------------------------


def _power_jacobian(fmap: MapModel, x: np.ndarray, n: int):
    """F^n(x) on the lift and D(F^n)(x), vectorised over leading axes."""
    d = fmap.dimension
    J = np.broadcast_to(np.eye(d), x.shape + (d,)).copy()
    y = x.copy()
    for _ in range(n):
        J = fmap.jacobian(y) @ J
        y = fmap.lift(y)
    return y, J


def _divisors(n: int) -> list[int]:
    return [p for p in range(1, n + 1) if n % p == 0]


@dataclass
class SearchDiagnostics:
    seeds: int
    converged: int
    non_isolated: int
    max_residual: float


def _newton(fmap, x, m, n, tol, max_iter):
    ok = np.zeros(len(x), dtype=bool)
    degenerate = np.zeros(len(x), dtype=bool)
    active = np.arange(len(x))
    for _ in range(max_iter):
        if len(active) == 0:
            break
        y, J = _power_jacobian(fmap, x[active], n)
        g = y - x[active] - m[active]
        done = np.max(np.abs(g), axis=1) < tol
        ok[active[done]] = True
        J = J - np.eye(fmap.dimension)
        det = np.linalg.det(J)
        scale = np.max(np.abs(J), axis=(1, 2)) ** fmap.dimension + 1.0
        sing = np.abs(det) < 1e-12 * scale
        degenerate[active[sing & done]] = True
        keep = ~done & ~sing
        idx = active[keep]
        if len(idx) == 0:
            break
        step = np.linalg.solve(J[keep], -g[keep][..., None])[..., 0]
        # keep Newton from jumping across many lift cells at once
        big = np.max(np.abs(step), axis=1, keepdims=True)
        step = step * np.minimum(1.0, 0.5 / np.maximum(big, 1e-300))
        x[idx] = x[idx] + step
        active = idx
    return ok, degenerate


def find_periodic_points(
    fmap: MapModel,
    n: int,
    grid_density: int = 50,
    tol: float = 1e-10,
    exact_period: bool = False,
    workers: int = 1,
    max_iter: int = 40,
    return_diagnostics: bool = False,
):
    """Points with f^n(x) = x found by Newton on F^n(x) = x + m.

    Seeds: a grid_density^d grid; each seed tries the lift shift
    m = round(F^n(x0) - x0) and its neighbours in {-1, 0, 1}^d.  Solutions
    are deduplicated on the torus within 10 tol.  One PeriodicOrbit per
    point, with ``points`` its orbit over the minimal period.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = fmap.dimension
    axes = (np.arange(grid_density) + 0.5) / grid_density
    seeds = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    shifts = np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T

    def work(chunk):
        y, _ = _power_jacobian(fmap, chunk, n)
        base = np.round(y - chunk)
        x = np.repeat(chunk, len(shifts), axis=0)
        m = (base[:, None, :] + shifts[None]).reshape(-1, d)
        ok, deg = _newton(fmap, x, m, n, tol, max_iter)
        return wrap(x[ok]), int(deg.sum())

    chunks = np.array_split(seeds, max(1, min(len(seeds), 8 * max(1, workers))))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    found = np.vstack([p[0] for p in parts]) if parts else np.zeros((0, d))
    non_isolated = sum(p[1] for p in parts)
    if non_isolated:
        warnings.warn(
            f"{non_isolated} solutions with singular D(f^{n}) - I: periodic points are not isolated",
            NonIsolatedWarning,
            stacklevel=2,
        )
    pts = _dedupe(found, 10 * tol)
    # residual and minimal period
    orbit = fmap.iterate(pts, n) if len(pts) else np.zeros((n + 1, 0, d))
    resid = torus_dist(orbit[n], pts) if len(pts) else np.zeros(0)
    keep = resid <= 100 * tol
    pts, orbit, resid = pts[keep], orbit[:, keep], resid[keep]
    period = np.full(len(pts), n)
    for p in reversed(_divisors(n)[:-1]):
        hit = torus_dist(orbit[p], pts) <= 100 * tol
        period[hit] = p
    out = []
    for i in range(len(pts)):
        P = int(period[i])
        if exact_period and P != n:
            continue
        seg = orbit[:P, i]
        out.append(PeriodicOrbit(seg, period_multipliers(fmap, seg), float(resid[i]), 0))
    if return_diagnostics:
        diag = SearchDiagnostics(len(seeds) * len(shifts), len(found), non_isolated, float(resid.max(initial=0.0)))
        return out, diag
    return out


def _dedupe(points: np.ndarray, radius: float) -> np.ndarray:
    """Lowest-index representative per cluster on the torus."""
    if len(points) == 0:
        return points
    key = np.round(points / radius).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    cand = wrap(points[np.sort(first)])
    cand[cand >= 1.0] = 0.0
    tree = cKDTree(cand, boxsize=1.0)
    parent = np.arange(len(cand))
    for i, j in sorted(tree.query_pairs(2 * radius)):
        ri, rj = parent[i], parent[j]
        while parent[ri] != ri:
            ri = parent[ri]
        while parent[rj] != rj:
            rj = parent[rj]
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([_root(parent, i) for i in range(len(cand))])
    reps = np.unique(roots)
    out = cand[reps]
    order = np.lexsort(out.T[::-1])
    return out[order]


def _root(parent, i):
    while parent[i] != i:
        i = parent[i]
    return i


# -- hyperbolicity -----------------------------------------------------------


@dataclass
class GrowthProfile:
    """Per-point data that decides (K, a)-hyperbolicity for any (K, a).

    stable[:, j-1]  = |Df^j on E^s| at the point, j = 1..P
    unstable[:, j-1] = co-norm of Df^j on E^u
    Rows are orbit points (all P of them).
    """

    period: int
    index: int
    log_rates: np.ndarray  # log|mu| / P per multiplier
    stable: np.ndarray  # (P, P)
    unstable: np.ndarray  # (P, P)
    anchor: np.ndarray | None = None  # orbit points matching the rows

    def neutral(self, a: float) -> bool:
        return bool(np.any(np.abs(self.log_rates) < a))

    def passes(self, K: float, a: float) -> bool:
        if self.neutral(a):
            return False
        j = np.arange(1, self.period + 1)
        ok_s = self.stable.shape[1] == 0 or np.all(self.stable * np.exp(j * a) <= 1.0 / K * (1 + 1e-12))
        ok_u = self.unstable.shape[1] == 0 or np.all(self.unstable * np.exp(-j * a) >= K * (1 - 1e-12))
        return bool(ok_s and ok_u)


def _invariant_bases(M: np.ndarray):
    """Orthonormal bases of the stable and unstable invariant subspaces of M."""
    T_in, Z_in, k_in = schur(M, output="real", sort="iuc")
    T_out, Z_out, k_out = schur(M, output="real", sort="ouc")
    return Z_in[:, :k_in], Z_out[:, :k_out]


def growth_profile(fmap: MapModel, orbit: PeriodicOrbit) -> GrowthProfile:
    pts = orbit.points
    P, d = pts.shape
    jac = fmap.jacobian(pts)
    rates = np.log(np.abs(orbit.multipliers)) / P
    stable = np.zeros((P, P))
    unstable = np.zeros((P, P))
    index = None
    for i in range(P):
        M = np.eye(d)
        for j in range(P):
            M = jac[(i + j) % P] @ M
        Es, Eu = _invariant_bases(M)
        if Es.shape[1] + Eu.shape[1] != d:
            raise NeutralMultiplier("multiplier on the unit circle")
        index = Es.shape[1]
        Vs, Vu = Es, Eu
        for j in range(P):
            J = jac[(i + j) % P]
            Vs, Vu = J @ Vs, J @ Vu
            if Vs.shape[1]:
                stable[i, j] = np.linalg.svd(Vs, compute_uv=False)[0]
            if Vu.shape[1]:
                unstable[i, j] = np.linalg.svd(Vu, compute_uv=False)[-1]
    ds = index or 0
    return GrowthProfile(
        P, ds, rates, stable if ds else np.zeros((P, 0)), unstable if d - ds else np.zeros((P, 0)), pts.copy()
    )


@dataclass
class HyperbolicityReport:
    hyperbolic: bool
    index: int
    K: float
    a: float


def classify_hyperbolicity(fmap: MapModel, orbit: PeriodicOrbit, K: float, a: float, profile: GrowthProfile | None = None):
    """(K, a)-hyperbolicity of a periodic orbit; index = dim E^s."""
    P = orbit.period
    rates = np.log(np.abs(orbit.multipliers)) / P
    if np.any(np.abs(rates) < a):
        raise NeutralMultiplier(f"|multiplier|^(1/P) = {np.exp(rates[np.argmin(np.abs(rates))]):.4g} within (e^-a, e^a)")
    prof = profile or growth_profile(fmap, orbit)
    return HyperbolicityReport(prof.passes(K, a), prof.index, K, a)


# -- census table ------------------------------------------------------------


@dataclass
class CensusRow:
    n: int
    P: int
    oracle: int | None
    PH: dict  # (K, a) -> count
    PH_index: dict  # (K, a) -> {index: count}

    @property
    def growth(self) -> float:
        return math.log(self.P) / self.n if self.P > 0 else float("-inf")


@dataclass
class CensusTable:
    rows: list[CensusRow]
    K_grid: tuple = K_GRID
    a_grid: tuple = A_GRID
    map_name: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return max(r.n for r in self.rows) if self.rows else 0

    def check_partition(self) -> bool:
        return all(
            r.PH[key] == sum(r.PH_index[key].values()) and r.PH[key] <= r.P for r in self.rows for key in r.PH
        )

    def to_tsv(self, sep: str = "\t") -> str:
        keys = [(K, a) for a in self.a_grid for K in self.K_grid]
        indices = sorted({i for r in self.rows for k in keys for i in r.PH_index[k]})
        head = ["n", "P_n", "oracle", "growth"]
        for K, a in keys:
            head.append(f"PH[K={K},a={a}]")
            head.extend(f"PH[K={K},a={a},I={i}]" for i in indices)
        lines = [sep.join(head)]
        for r in self.rows:
            cells = [str(r.n), str(r.P), "" if r.oracle is None else str(r.oracle), f"{r.growth:.6f}"]
            for k in keys:
                cells.append(str(r.PH[k]))
                cells.extend(str(r.PH_index[k].get(i, 0)) for i in indices)
            lines.append(sep.join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "map": self.map_name,
            "rows": [
                {
                    "n": r.n,
                    "P_n": r.P,
                    "oracle": r.oracle,
                    "growth": r.growth,
                    "PH": {f"K={K},a={a}": v for (K, a), v in r.PH.items()},
                    "PH_index": {f"K={K},a={a}": {str(i): c for i, c in sorted(v.items())} for (K, a), v in r.PH_index.items()},
                }
                for r in self.rows
            ],
            "partition_ok": self.check_partition(),
            "diagnostics": self.diagnostics,
        }


def build_census(
    fmap: MapModel,
    n_max: int = 8,
    grid_density: int = 50,
    tol: float = 1e-10,
    K_grid=K_GRID,
    a_grid=A_GRID,
    workers: int = 1,
) -> CensusTable:
    rows = []
    profiles: dict[tuple, GrowthProfile] = {}
    diag = {}
    for n in range(1, n_max + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonIsolatedWarning)
            orbits, sd = find_periodic_points(fmap, n, grid_density, tol, workers=workers, return_diagnostics=True)
        diag[str(n)] = {"seeds": sd.seeds, "non_isolated": sd.non_isolated, "max_residual": sd.max_residual}
        if caught:
            diag[str(n)]["warning"] = str(caught[0].message)
        oracle = None
        if fmap.is_linear:
            try:
                oracle = exact_count_linear(fmap.matrix, n)
            except DegenerateCount:
                oracle = None
        PH = {(K, a): 0 for a in a_grid for K in K_grid}
        PH_index = {(K, a): {} for a in a_grid for K in K_grid}
        for orb in orbits:
            prof = _profile_for(fmap, orb, profiles, tol)
            if prof is None:
                continue
            i = _row_of(prof, orb)
            sub = GrowthProfile(prof.period, prof.index, prof.log_rates, prof.stable[i : i + 1], prof.unstable[i : i + 1])
            for key in PH:
                if sub.passes(*key):
                    PH[key] += 1
                    PH_index[key][prof.index] = PH_index[key].get(prof.index, 0) + 1
        rows.append(CensusRow(n, len(orbits), oracle, PH, PH_index))
    table = CensusTable(rows, tuple(K_grid), tuple(a_grid), fmap.name, diag)
    assert table.check_partition()
    return table


def _orbit_key(points: np.ndarray, tol: float) -> tuple:
    """Rotation-independent key: the lexicographically smallest point, rounded."""
    P = points[np.lexsort(points.T[::-1])[0]]
    return tuple(np.round(P / (1e4 * tol)).astype(np.int64)) + (len(points),)


def _profile_for(fmap, orb, cache, tol):
    key = _orbit_key(orb.points, tol)
    if key not in cache:
        try:
            cache[key] = growth_profile(fmap, orb)
        except NeutralMultiplier:
            cache[key] = None
    return cache[key]


def _row_of(prof, orb) -> int:
    """Row of the profile corresponding to the orbit's own starting point."""
    d = torus_dist(prof.anchor, orb.points[0][None])
    return int(np.argmin(d))


# -- growth and entropy ------------------------------------------------------


@dataclass
class GrowthReport:
    sequence: list[float]
    max_tail_estimate: float


def growth_rate(table_or_counts) -> GrowthReport:
    """(1/n) log P_n and the max over the last ceil(n_max/2) entries."""
    if isinstance(table_or_counts, CensusTable):
        counts = [r.P for r in sorted(table_or_counts.rows, key=lambda r: r.n)]
    else:
        counts = list(table_or_counts)
    seq = [math.log(c) / n if c > 0 else float("-inf") for n, c in enumerate(counts, start=1)]
    if not seq:
        return GrowthReport([], float("-inf"))
    tail = seq[len(seq) - math.ceil(len(seq) / 2) :]
    return GrowthReport(seq, max(tail))


def _ph_tail(table: CensusTable, key) -> float:
    counts = [r.PH[key] for r in sorted(table.rows, key=lambda r: r.n)]
    rep = growth_rate(counts)
    return max(rep.max_tail_estimate, 0.0)


@dataclass
class EntropyEstimate:
    estimate: float
    sweep: dict  # (K, a) -> PH growth tail
    horseshoe_bound: float

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "horseshoe_bound": self.horseshoe_bound,
            "sweep": {f"K={K},a={a}": v for (K, a), v in self.sweep.items()},
        }


def hyperbolic_entropy_estimate(fmap: MapModel | None, horseshoe_results=(), census: CensusTable | None = None) -> EntropyEstimate:
    """max(best horseshoe entropy bound, PH growth tails over the (K, a) sweep)."""
    hs = [float(h.entropy_lower_bound) for h in horseshoe_results if h is not None]
    best_hs = max([0.0] + [v for v in hs if np.isfinite(v)])
    sweep = {}
    if census is not None:
        for key in census.rows[0].PH if census.rows else []:
            sweep[key] = _ph_tail(census, key)
    est = max([best_hs] + list(sweep.values()))
    return EntropyEstimate(est, sweep, best_hs)


@dataclass
class DegreeReport:
    degree: int
    log_degree: float
    tail: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.tail >= self.log_degree - self.slack

    def to_dict(self) -> dict:
        return {"degree": self.degree, "log_degree": self.log_degree, "tail": self.tail, "slack": self.slack, "passed": self.passed}


def degree_check(fmap_or_degree, table, slack: float = DEGREE_SLACK) -> DegreeReport:
    """Growth tail of P_n against log|deg f| (diagnostic)."""
    deg = fmap_or_degree.degree if isinstance(fmap_or_degree, MapModel) else int(fmap_or_degree)
    tail = growth_rate(table).max_tail_estimate
    return DegreeReport(deg, math.log(deg) if deg > 0 else float("-inf"), tail, slack)
