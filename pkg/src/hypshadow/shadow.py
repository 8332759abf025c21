"""Shadowing for sequences of hyperbolic affine-plus-Lipschitz maps.

The abstract problem lives on a chain of split spaces R^du x R^ds:

    phi_k(v) = A_k v + b_k + w_k(v),   A_k block diagonal,

and asks for v_k with phi_k(v_k) = v_{k+1}.  ``solve_sequence`` runs the
contraction behind the existence proof: stable parts forward, unstable
parts backward through the block inverses, nonlinearity re-evaluated each
sweep.  The map-level reduction conjugates f through Lyapunov charts
along the pseudo-orbit and maps the solution back to the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .cocycle import (
    TAIL_TOL,
    LyapunovSpectrum,
    chart_orbit,
)
from .errors import (
    AmbiguousBranch,
    ChartDomainExceeded,
    EpsilonTooLarge,
    InvalidConstants,
    NewtonDivergence,
    NoConvergence,
    OffsetTooLarge,
    SingularUnstableBlock,
)
from .mapmodel import MapModel, nearest_preimage, torus_delta, torus_dist, wrap

SOLVER_TOL = 1e-11
MAX_ITER = 200


# -- constants ---------------------------------------------------------------


def _exact(x) -> Fraction:
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class ShadowingConstants:
    lam: float
    N: float
    kappa: float
    Delta: float
    N1: float
    L: float
    d0: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("lam", "N", "kappa", "Delta", "N1", "L", "d0")}


def shadowing_constants(N: float, lam: float, kappa: float, Delta: float) -> ShadowingConstants:
    """N1 = N(1+lam)/(1-lam), L = N1/(1-kappa N1), d0 = Delta/L.

    Evaluated in exact rational arithmetic on the decimal inputs, so
    textbook inputs give textbook outputs.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if N < 1 or kappa < 0 or Delta <= 0:
        raise ValueError("need N >= 1, kappa >= 0, Delta > 0")
    n, l, k, D = map(_exact, (N, lam, kappa, Delta))
    n1 = n * (1 + l) / (1 - l)
    if k * n1 >= 1:
        raise InvalidConstants(f"kappa*N1 = {float(k * n1):.4g} >= 1")
    L = n1 / (1 - k * n1)
    return ShadowingConstants(float(l), float(n), float(k), float(D), float(n1), float(L), float(D / L))


@dataclass(frozen=True)
class UniquenessReport:
    ok: bool
    gamma: float
    k: float


def check_uniqueness_conditions(lam: float, N: float, kappa0: float) -> UniquenessReport:
    """Feasibility of lam + 2k < 1 and 1/lam - 2k >= gamma > 1 with
    (lam + 2k)/gamma < 1, where k = N kappa0.  Reports the largest gamma."""
    k = N * kappa0
    gamma = 1.0 / lam - 2.0 * k
    ok = lam + 2.0 * k < 1.0 and gamma > 1.0 and (lam + 2.0 * k) / gamma < 1.0
    return UniquenessReport(bool(ok), float(gamma), float(k))


# -- abstract sequence problem -----------------------------------------------


@dataclass
class SequenceProblem:
    """phi_k(v) = A_k v + offsets_k + nonlin(v)_k on split coordinates.

    Nodes are 0..n-1.  A non-cyclic problem has n-1 steps, a cyclic one has
    n (the last step maps node n-1 to node 0).  The first ``du``
    coordinates are unstable.  ``nonlin`` takes all node values (n, d) and
    returns the step residuals, vectorised.
    """

    A: np.ndarray  # (steps, d, d)
    offsets: np.ndarray  # (steps, d)
    du: int
    constants: ShadowingConstants
    nonlin: Callable[[np.ndarray], np.ndarray] | None = None
    cyclic: bool = False
    block_tol: float = 1e-10

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.nonlin is None:
            zero = np.zeros_like(self.offsets)
            self.nonlin = lambda v: zero
        du = self.du
        off = max(
            np.max(np.abs(self.A[:, :du, du:]), initial=0.0),
            np.max(np.abs(self.A[:, du:, :du]), initial=0.0),
        )
        if off > self.block_tol * max(1.0, np.max(np.abs(self.A))):
            raise ValueError("A_k must be block diagonal in split coordinates")

    @property
    def n_nodes(self) -> int:
        return len(self.A) if self.cyclic else len(self.A) + 1

    @property
    def dimension(self) -> int:
        return self.A.shape[-1]

    def phi(self, v: np.ndarray) -> np.ndarray:
        """phi_k(v_k) for every step."""
        src = v if self.cyclic else v[:-1]
        return np.einsum("kij,kj->ki", self.A, src) + self.offsets + self.nonlin(v)

    def step_residuals(self, v: np.ndarray) -> np.ndarray:
        tgt = np.roll(v, -1, axis=0) if self.cyclic else v[1:]
        return np.linalg.norm(self.phi(v) - tgt, axis=1)

    def hyperbolicity(self) -> float:
        """Worst of |A^s| and |(A^u)^{-1}| over steps; must be < 1."""
        du = self.du
        worst = 0.0
        if self.dimension - du:
            worst = max(worst, float(np.max(np.linalg.norm(self.A[:, du:, du:], ord=2, axis=(-2, -1)))))
        if du:
            sv = np.linalg.svd(self.A[:, :du, :du], compute_uv=False)[:, -1]
            worst = max(worst, float(np.max(1.0 / np.maximum(sv, 1e-300))))
        return worst


@dataclass
class ShadowResult:
    points: np.ndarray  # solution v_k, or torus points y_n at map level
    certified_bound: float
    residuals: np.ndarray
    iterations: int
    updates: list[float] = field(default_factory=list)
    offset: float = 0.0  # max |phi_k(0)|
    constants: ShadowingConstants | None = None
    distances: np.ndarray | None = None  # map level: d(y_n, x_n)
    epsilon: float = 0.0
    C: float = 0.0
    K: float = 0.0
    certified: bool = True
    note: str = ""

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))

    def to_dict(self) -> dict:
        return {
            "certified_bound": self.certified_bound,
            "C": self.C,
            "K": self.K,
            "epsilon": self.epsilon,
            "offset": self.offset,
            "iterations": self.iterations,
            "max_residual": self.max_residual,
            "max_distance": None if self.distances is None else float(np.max(self.distances)),
            "constants": None if self.constants is None else self.constants.to_dict(),
            "length": int(len(self.points)),
            "certified": self.certified,
            "note": self.note,
        }


def _inverse_blocks(Au):
    if Au.shape[-1] == 0:
        return Au
    sv = np.linalg.svd(Au, compute_uv=False)
    if np.any(sv[:, -1] <= 1e-14 * np.maximum(sv[:, 0], 1.0)):
        raise SingularUnstableBlock("unstable block is singular")
    return np.linalg.inv(Au)


def _linear_sweep(As, Bu, g, du, cyclic):
    """Solve v_{k+1} = A_k v_k + g_k exactly for block-diagonal A_k.

    Non-cyclic: s_0 = 0 and u_{n-1} = 0.  Cyclic: periodic in both parts.
    ``Bu`` are the unstable block inverses.
    """
    steps, d = g.shape
    n = steps if cyclic else steps + 1
    ds = d - du
    v = np.zeros((n, d))
    gs, gu = g[:, du:], g[:, :du]
    if ds:
        s = np.zeros(ds)
        if cyclic:
            # s_0 = M s_0 + (forward sum from zero) => s_0 = (I - M)^{-1} r
            M = np.eye(ds)
            r = np.zeros(ds)
            for k in range(steps):
                r = As[k] @ r + gs[k]
                M = As[k] @ M
            s = np.linalg.solve(np.eye(ds) - M, r)
        v[0, du:] = s
        for k in range(n - 1):
            s = As[k] @ s + gs[k]
            v[k + 1, du:] = s
    if du:
        u = np.zeros(du)
        if cyclic:
            M = np.eye(du)
            r = np.zeros(du)
            for k in range(steps - 1, -1, -1):
                r = Bu[k] @ (r - gu[k])
                M = Bu[k] @ M
            u = np.linalg.solve(np.eye(du) - M, r)
            v[0, :du] = u
            # node k from node k+1, with node n identified with node 0
            ks = range(n - 1, 0, -1)
        else:
            ks = range(n - 2, -1, -1)
        for k in ks:
            u = Bu[k] @ (u - gu[k])
            v[k, :du] = u
    return v


def solve_sequence(
    prob: SequenceProblem,
    tol: float = SOLVER_TOL,
    max_iter: int = MAX_ITER,
    initial: np.ndarray | None = None,
    check_bound: bool = True,
    check_offset: bool = True,
) -> ShadowResult:
    """Fixed point of the stable-forward / unstable-backward sweep.

    Returns v with phi_k(v_k) = v_{k+1} and sup|v_k| <= L d, d = max |phi_k(0)|.
    """
    c = prob.constants
    du = prob.du
    d = float(np.max(np.linalg.norm(prob.offsets, axis=1), initial=0.0))
    if check_offset and d > c.d0:
        raise OffsetTooLarge(f"max offset {d:.3g} exceeds d0 = {c.d0:.3g}")
    As = prob.A[:, du:, du:]
    Bu = _inverse_blocks(prob.A[:, :du, :du])
    v = np.zeros((prob.n_nodes, prob.dimension)) if initial is None else np.array(initial, dtype=float)
    updates: list[float] = []
    for it in range(1, max_iter + 1):
        g = prob.offsets + prob.nonlin(v)
        new = _linear_sweep(As, Bu, g, du, prob.cyclic)
        upd = float(np.max(np.abs(new - v)))
        updates.append(upd)
        v = new
        if upd < tol:
            break
    else:
        raise NoConvergence(f"update still {updates[-1]:.3g} after {max_iter} sweeps")
    bound = c.L * d
    sup = float(np.max(np.linalg.norm(v, axis=1)))
    if check_bound and sup > bound * (1 + 1e-9) + 10 * tol:
        raise AssertionError(f"solver bound violated: {sup:.3g} > L d = {bound:.3g}")
    return ShadowResult(v, bound, prob.step_residuals(v), it, updates, d, c)


# -- pseudo-orbits on the torus ----------------------------------------------


@dataclass
class PseudoOrbit:
    """Torus points x_0..x_{n-1}; ``starts`` marks indices beginning a new
    true-orbit segment (a jump from the previous index).  For a cyclic orbit
    the step from x_{n-1} to x_0 is also a step; index 0 always starts a
    segment.  ``history`` optionally gives points before x_0 (chronological).
    """

    points: np.ndarray
    starts: np.ndarray
    cyclic: bool = False
    history: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        s = sorted(set(int(i) for i in np.atleast_1d(self.starts)) | {0})
        if s[-1] >= len(self.points) or s[0] < 0:
            raise ValueError("segment start out of range")
        self.starts = np.array(s, dtype=int)

    def __len__(self):
        return len(self.points)

    @property
    def n_steps(self) -> int:
        return len(self.points) if self.cyclic else len(self.points) - 1

    def targets(self) -> np.ndarray:
        return np.roll(self.points, -1, axis=0)[: self.n_steps]

    def jumps(self, fmap: MapModel) -> np.ndarray:
        """Torus distance between f(x_n) and x_{n+1}, per step."""
        return torus_dist(fmap.eval(self.points[: self.n_steps]), self.targets())

    def epsilon(self, fmap: MapModel) -> float:
        return float(np.max(self.jumps(fmap), initial=0.0))

    def jump_indices(self) -> np.ndarray:
        """Steps n whose target x_{n+1} starts a new segment."""
        n = len(self.points)
        return np.array([(s - 1) % n for s in self.starts if s or self.cyclic], dtype=int)

    def segments(self) -> list[tuple[int, int]]:
        ends = list(self.starts[1:]) + [len(self.points)]
        return [(int(a), int(b)) for a, b in zip(self.starts, ends)]

    def to_text(self) -> str:
        flags = np.zeros(len(self.points), dtype=int)
        flags[self.starts] = 1
        flags[0] = 0 if not self.cyclic else flags[0]
        lines = ["# index x1 ... xd jump_flag" + (" cyclic" if self.cyclic else "")]
        for i, (x, fl) in enumerate(zip(self.points, flags)):
            lines.append(f"{i} " + " ".join(repr(float(c)) for c in x) + f" {fl}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, cyclic: bool | None = None) -> "PseudoOrbit":
        rows = []
        flagged_cyclic = False
        for line in text.splitlines():
            if line.startswith("#"):
                flagged_cyclic |= "cyclic" in line
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"bad pseudo-orbit line: {line!r}")
            rows.append((int(parts[0]), [float(v) for v in parts[1:-1]], int(parts[-1])))
        rows.sort(key=lambda r: r[0])
        if [r[0] for r in rows] != list(range(len(rows))):
            raise ValueError("indices must run 0..n-1")
        pts = np.array([r[1] for r in rows])
        starts = [r[0] for r in rows if r[2]]
        return cls(pts, starts, flagged_cyclic if cyclic is None else cyclic)


def true_orbit_pseudo(fmap: MapModel, x0, length: int) -> PseudoOrbit:
    return PseudoOrbit(fmap.iterate(wrap(x0), length - 1), [])


def jump_pseudo_orbit(fmap: MapModel, x0, length: int, jump_at, jump_size: float, seed: int = 0) -> PseudoOrbit:
    """True orbit with a kick of size ``jump_size`` (random direction)
    landing on each index in ``jump_at``; iteration continues from the kick."""
    rng = np.random.default_rng(seed)
    jump_at = sorted(int(j) for j in jump_at)
    pts = np.empty((length, fmap.dimension))
    pts[0] = wrap(x0)
    for n in range(1, length):
        pts[n] = fmap.eval(pts[n - 1])
        if n in jump_at:
            u = rng.standard_normal(fmap.dimension)
            pts[n] = wrap(pts[n] + jump_size * u / np.linalg.norm(u))
    return PseudoOrbit(pts, jump_at)


def concatenate_segments(fmap: MapModel, seeds, lengths, cyclic: bool = True) -> PseudoOrbit:
    """Pseudo-orbit made of true orbit pieces from each seed point."""
    pieces, starts, pos = [], [], 0
    for x, m in zip(seeds, lengths):
        pieces.append(fmap.iterate(wrap(x), m - 1))
        starts.append(pos)
        pos += m
    return PseudoOrbit(np.vstack(pieces), starts, cyclic)


# -- charts along a pseudo-orbit ---------------------------------------------


@dataclass
class PseudoOrbitCharts:
    """Lyapunov charts at every pseudo-orbit point.

    ``C[n]`` is the chart of x_n along its own segment history; ``Cnext[n]``
    is the chart of f(x_n) continuing the segment of x_n.  They differ only
    across jumps.
    """

    C: np.ndarray  # (n, d, d)
    Cinv: np.ndarray
    Cnext: np.ndarray  # (steps, d, d)
    xi: np.ndarray  # (n,)
    du: int
    lam: float
    eta: float

    @property
    def K(self) -> float:
        sv = np.linalg.svd(self.C, compute_uv=False)
        return float(np.max(np.maximum(sv[:, 0], 1.0 / sv[:, -1])))


def chart_padding(eta: float, tail_tol: float = TAIL_TOL) -> int:
    """History needed on each side for the adapted sums to reach ``tail_tol``."""
    return int(1.5 * math.log(1.0 / tail_tol) / (2.0 * eta)) + 20


def _follow_back(fmap: MapModel, p, steps: int, reference: np.ndarray) -> np.ndarray:
    """Nearest-branch backward orbit of p, tracking ``reference`` (chronological)
    for as long as it lasts and then the point itself."""
    out = np.empty((steps, fmap.dimension))
    cur = wrap(p)
    for j in range(1, steps + 1):
        ref = reference[-j] if j <= len(reference) else cur
        try:
            cur = nearest_preimage(fmap, cur, ref)
        except AmbiguousBranch:
            cur = fmap.preimages(cur)[0]
        out[steps - j] = cur
    return out


def chart_pseudo_orbit(
    fmap: MapModel,
    pseudo: PseudoOrbit,
    spectrum: LyapunovSpectrum,
    eta: float,
    tail_tol: float = TAIL_TOL,
    holder: tuple[float, float] | None = None,
) -> PseudoOrbitCharts:
    """Charts for each segment from its padded true orbit.

    Backward padding follows the preceding pseudo-orbit points by the
    nearest-branch rule (cyclically when the orbit is cyclic); forward
    padding iterates f past the segment end.
    """
    pad = chart_padding(eta, tail_tol)
    n, d = pseudo.points.shape
    C = np.empty((n, d, d))
    Cinv = np.empty((n, d, d))
    Cnext = np.empty((pseudo.n_steps, d, d))
    xi = np.empty(n)
    du = spectrum.unstable_dim
    for a, b in pseudo.segments():
        seg = pseudo.points[a:b]
        if pseudo.cyclic:
            reps = pad // n + 1
            before = np.vstack([pseudo.points] * reps + [pseudo.points[:a]])
        else:
            hist = pseudo.history if pseudo.history is not None else np.zeros((0, d))
            before = np.vstack([hist, pseudo.points[:a]])
        past = _follow_back(fmap, seg[0], pad, before[len(before) - min(pad, len(before)) :])
        future = fmap.iterate(seg[-1], pad)[1:]
        ch = chart_orbit(fmap, np.vstack([past, seg, future]), spectrum, eta, tail_tol, holder)
        lo = pad - ch.offset
        hi = lo + (b - a)
        if lo < 0 or hi >= len(ch):
            raise EpsilonTooLarge("segment charts did not converge; increase eta")
        C[a:b] = ch.C[lo:hi]
        Cinv[a:b] = ch.Cinv[lo:hi]
        xi[a:b] = ch.xi[lo:hi]
        m = min(b, pseudo.n_steps) - a
        Cnext[a : a + m] = ch.C[lo + 1 : lo + 1 + m]
    return PseudoOrbitCharts(C, Cinv, Cnext, xi, du, spectrum.lam, eta)


# -- map-level shadowing -----------------------------------------------------


@dataclass
class ChartProblem:
    """The chart-conjugated problem plus everything needed to certify it."""

    problem: SequenceProblem
    K: float
    epsilon: float
    eps0: float
    C: float
    radius: np.ndarray  # per-node allowed torus displacement K^{-1} xi_n
    failure: str = ""  # why the a-priori certificate does not apply

    @property
    def certified(self) -> bool:
        return not self.failure


def chart_problem(
    fmap: MapModel,
    pseudo: PseudoOrbit,
    charts: PseudoOrbitCharts,
    kappa_fraction: float,
    holder: tuple[float, float] | None = None,
) -> ChartProblem:
    """The pseudo-orbit as a sequence problem in Lyapunov charts, plus the
    a-priori constants (K, eps0, C) that certify its solution."""
    pts = pseudo.points
    n, d = pts.shape
    steps = pseudo.n_steps
    src = pts[:steps]
    Cn, Cinv_n = charts.C[:steps], charts.Cinv[:steps]
    Cn1 = np.roll(charts.C, -1, axis=0)[:steps]
    jac = fmap.jacobian(src)
    A = charts.Cnext @ jac @ Cinv_n
    du = charts.du
    A[:, :du, du:] = 0.0
    A[:, du:, :du] = 0.0
    delta = torus_delta(fmap.eval(src), pseudo.targets())
    offsets = np.einsum("kij,kj->ki", Cn1, delta)
    Flift = fmap.lift(src)

    def nonlin(v):
        x = src + np.einsum("kij,kj->ki", Cinv_n, v[:steps])
        full = np.einsum("kij,kj->ki", Cn1, fmap.lift(x) - Flift + delta)
        return full - offsets - np.einsum("kij,kj->ki", A, v[:steps])

    sv = np.linalg.svd(charts.C, compute_uv=False)
    norm_C = sv[:, 0]
    norm_Ci = 1.0 / sv[:, -1]
    K = float(np.max(np.maximum(norm_C, norm_Ci)))
    lam_c = SequenceProblem(A, offsets, du, shadowing_constants(1, 0.5, 0, 1)).hyperbolicity()
    eps = pseudo.epsilon(fmap)
    if lam_c >= 1:
        raise EpsilonTooLarge(f"chart blocks not hyperbolic (rate {lam_c:.3g})")
    N1 = (1 + lam_c) / (1 - lam_c)
    alpha, Lh = fmap.holder if holder is None else holder
    target = kappa_fraction / N1
    n_C1 = np.roll(norm_C, -1)[:steps]
    mismatch = np.linalg.norm(charts.C[np.arange(1, steps + 1) % n] - charts.Cnext, ord=2, axis=(-2, -1))
    b = mismatch * np.linalg.norm(jac, ord=2, axis=(-2, -1)) * norm_Ci[:steps]
    cap = float(np.min(charts.xi / (K * norm_Ci)))
    radius = charts.xi / K
    if np.max(b) >= target:
        # no admissible Delta: keep the problem but mark it uncertified
        consts = shadowing_constants(1.0, lam_c, 0.0, cap)
        prob = SequenceProblem(A, offsets, du, consts, nonlin, pseudo.cyclic)
        why = f"chart mismatch across jumps too large ({np.max(b):.3g} >= {target:.3g})"
        return ChartProblem(prob, K, eps, 0.0, consts.L * K * K, radius, why)
    if Lh > 0:
        a = n_C1 * Lh * norm_Ci[:steps] ** (1 + alpha)
        Delta = min(float(np.min(((target - b) / a) ** (1.0 / alpha))), cap)
        kappa = float(np.max(b + a * Delta**alpha))
    else:
        Delta = cap
        kappa = float(np.max(b))
    consts = shadowing_constants(1.0, lam_c, kappa, Delta)
    prob = SequenceProblem(A, offsets, du, consts, nonlin, pseudo.cyclic)
    eps0 = consts.d0 / (2.0 * K)
    why = "" if eps <= eps0 else f"epsilon {eps:.3g} exceeds eps0 = {eps0:.3g}"
    return ChartProblem(prob, K, eps, eps0, consts.L * K * K, radius, why)


def shadow_pseudo_orbit(
    fmap: MapModel,
    pseudo: PseudoOrbit,
    charts: PseudoOrbitCharts,
    kappa_fraction: float = 0.5,
    tol: float = SOLVER_TOL,
    max_iter: int = MAX_ITER,
    initial: np.ndarray | None = None,
    holder: tuple[float, float] | None = None,
    certify: bool = True,
) -> ShadowResult:
    """True orbit C*eps-shadowing the pseudo-orbit, with C = L K^2.

    With ``certify=False`` the same solve runs when the a-priori
    hypotheses fail; the result is then flagged ``certified=False`` and
    only its residuals are meaningful.
    """
    cp = chart_problem(fmap, pseudo, charts, kappa_fraction, holder)
    if certify and not cp.certified:
        raise EpsilonTooLarge(cp.failure)
    if cp.certified:
        res = solve_sequence(cp.problem, tol, max_iter, initial)
    else:
        res = solve_sequence(cp.problem, tol, max_iter, initial, check_bound=False, check_offset=False)
    v = res.points
    disp = np.einsum("kij,kj->ki", charts.Cinv, v)
    dist = np.linalg.norm(disp, axis=1)
    if cp.certified and np.any(dist > cp.radius):
        raise ChartDomainExceeded("shadowing orbit leaves the chart domain")
    y = wrap(pseudo.points + disp)
    steps = pseudo.n_steps
    resid = torus_dist(fmap.eval(y[:steps]), np.roll(y, -1, axis=0)[:steps])
    eps = cp.epsilon
    bound = cp.C * eps
    if cp.certified and np.max(dist, initial=0.0) > bound * (1 + 1e-9) + 1e-15:
        raise AssertionError("shadowing bound violated")
    return ShadowResult(
        y, bound, resid, res.iterations, res.updates, res.offset, res.constants, dist, eps, cp.C, cp.K,
        cp.certified, cp.failure,
    )


@dataclass
class PeriodicOrbit:
    points: np.ndarray  # (P, d)
    multipliers: np.ndarray
    residual: float
    newton_steps: int
    shadow: ShadowResult | None = None

    @property
    def period(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "residual": self.residual,
            "newton_steps": self.newton_steps,
            "multipliers": [[float(m.real), float(m.imag)] for m in self.multipliers],
            "points": self.points.tolist(),
        }


def period_multipliers(fmap: MapModel, points: np.ndarray) -> np.ndarray:
    M = np.eye(fmap.dimension)
    for J in fmap.jacobian(points):
        M = J @ M
    ev = np.linalg.eigvals(M)
    return ev[np.argsort(-np.abs(ev), kind="stable")]


def polish_periodic(fmap: MapModel, points: np.ndarray, tol: float = 1e-13, max_iter: int = 50):
    """Damped multiple-shooting Newton for F(y_k) = y_{k+1} + m_k (cyclic).

    Working on all P points at once keeps the linear systems well
    conditioned, unlike Newton on f^P directly.
    """
    y = np.array(points, dtype=float)
    P, d = y.shape

    def resid(z):
        r = fmap.lift(z) - np.roll(z, -1, axis=0)
        return r - np.round(r)

    r = resid(y)
    nr = float(np.max(np.abs(r)))
    for it in range(max_iter):
        if nr < tol:
            return wrap(y), nr, it
        J = np.zeros((P * d, P * d))
        jac = fmap.jacobian(y)
        for k in range(P):
            J[k * d : (k + 1) * d, k * d : (k + 1) * d] += jac[k]
            j = (k + 1) % P
            J[k * d : (k + 1) * d, j * d : (j + 1) * d] -= np.eye(d)
        try:
            step = np.linalg.solve(J, -r.ravel()).reshape(P, d)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence("singular Newton system") from exc
        t = 1.0
        while t > 1e-4:
            cand = y + t * step
            rc = resid(cand)
            nc = float(np.max(np.abs(rc)))
            if nc < nr or nc < tol:
                y, r, nr = cand, rc, nc
                break
            t *= 0.5
        else:
            if nr < 1e3 * tol:
                return wrap(y), nr, it
            raise NewtonDivergence(f"line search failed at residual {nr:.3g}")
    if nr < tol:
        return wrap(y), nr, max_iter
    raise NewtonDivergence(f"residual {nr:.3g} after {max_iter} steps")


def shadow_periodic(
    fmap: MapModel,
    cyclic: PseudoOrbit,
    charts: PseudoOrbitCharts,
    kappa_fraction: float = 0.5,
    tol: float = SOLVER_TOL,
    certify: bool = True,
) -> PeriodicOrbit:
    """Cyclic shadowing followed by a Newton polish; returns a genuine periodic orbit."""
    if not cyclic.cyclic:
        raise ValueError("pseudo-orbit must be cyclic")
    try:
        res = shadow_pseudo_orbit(fmap, cyclic, charts, kappa_fraction, tol, certify=certify)
        start = res.points
    except (NoConvergence, ChartDomainExceeded):
        if certify:
            raise
        # uncertified fallback: Newton straight from the pseudo-orbit
        res = ShadowResult(cyclic.points.copy(), np.nan, np.zeros(0), 0, certified=False, note="sweep failed")
        start = cyclic.points
    y, nr, it = polish_periodic(fmap, start)
    moved = torus_dist(y, start)
    if res.certified and np.max(moved) > max(100 * tol, 1e-8) + 1e-3 * res.certified_bound:
        raise NewtonDivergence("Newton polish moved away from the shadowing orbit")
    res.points = y
    res.residuals = torus_dist(fmap.eval(y), np.roll(y, -1, axis=0))
    res.distances = torus_dist(y, cyclic.points)
    return PeriodicOrbit(y, period_multipliers(fmap, y), float(np.max(res.residuals)), it, res)
