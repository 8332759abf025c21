"""Derivative cocycle, Lyapunov spectrum, Oseledec frames and Lyapunov charts.

The chart construction follows the usual Oseledec-Pesin reduction: along an
orbit we track an invariant splitting E^u + E^s, measure each block in an
adapted ("Lyapunov") inner product, and read off a coordinate change C_k
that makes ``C_{k+1} Df(x_k) C_k^{-1}`` block diagonal with uniform bounds.

The adapted inner products are infinite weighted sums.  In frame
coordinates they satisfy exact one-step recursions

    G^u_{k+1} = I + c R^{u,-T}_k G^u_k R^{u,-1}_k        (forward)
    G^s_k     = I + c R^{s,T}_k G^s_{k+1} R^s_k          (backward)

with c = exp(2(lam - eta)), so starting both at the window edges gives the
sums truncated at the edge.  The block bounds follow directly from the
recursions, and the last summed term measures the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergentSeries,
    EmptyBlock,
    IllConditioned,
    NonConvergence,
    SingularFactor,
    SingularUnstable,
)
from .mapmodel import MapModel, OrbitWindow, torus_delta, wrap

GAP_TOL = 0.05
TAIL_TOL = 1e-8
SPLIT_TOL = 1e-6
BLOCK_TOL = 1e-8
COND_MAX = 1e8
MAX_CHART_RADIUS = 0.5


# -- cocycle -----------------------------------------------------------------


@dataclass
class CocycleWindow:
    matrices: np.ndarray  # (2W+1, d, d), A_k = Df(x_k)
    window: OrbitWindow

    @property
    def radius(self) -> int:
        return self.window.radius

    def at(self, k: int) -> np.ndarray:
        return self.matrices[k + self.radius]


def cocycle_window(fmap: MapModel, w: OrbitWindow) -> CocycleWindow:
    return CocycleWindow(fmap.jacobian(w.points), w)


def cocycle_product(cw: CocycleWindow, start: int, m: int) -> np.ndarray:
    """Ordered product of the cocycle from window index ``start`` over ``m`` steps.

    m > 0: A_{start+m-1} ... A_{start};  m = 0: identity;
    m < 0: A_{start+m}^{-1} ... A_{start-1}^{-1}.
    """
    W = cw.radius
    d = cw.matrices.shape[-1]
    lo, hi = (start, start + m) if m >= 0 else (start + m, start)
    if lo < -W or hi > W + (1 if m > 0 else 0):
        raise IndexError("product leaves the window")
    out = np.eye(d)
    if m >= 0:
        for k in range(start, start + m):
            out = cw.at(k) @ out
        return out
    for k in range(start - 1, start + m - 1, -1):
        a = cw.at(k)
        if abs(np.linalg.det(a)) < 1e-14 * max(1.0, np.linalg.norm(a)) ** d:
            raise SingularFactor(f"A_{k} is singular")
        out = np.linalg.solve(a, out)
    return out


# -- spectrum ----------------------------------------------------------------


@dataclass
class LyapunovSpectrum:
    exponents: np.ndarray  # distinct values, decreasing
    multiplicities: np.ndarray
    gap_tol: float = GAP_TOL
    raw: np.ndarray | None = None  # all d exponents before clustering

    @property
    def lam_plus(self) -> float | None:
        pos = self.exponents[self.exponents >= self.gap_tol]
        return float(pos.min()) if pos.size else None

    @property
    def lam_minus(self) -> float | None:
        neg = self.exponents[self.exponents <= -self.gap_tol]
        return float(neg.max()) if neg.size else None

    @property
    def lam(self) -> float | None:
        vals = [v for v in (self.lam_plus, None if self.lam_minus is None else -self.lam_minus) if v is not None]
        return min(vals) if vals else None

    @property
    def hyperbolic(self) -> bool:
        return bool(np.all(np.abs(self.exponents) >= self.gap_tol))

    @property
    def unstable_dim(self) -> int:
        return int(self.multiplicities[self.exponents > 0].sum())

    def to_dict(self) -> dict:
        return {
            "exponents": [float(v) for v in self.exponents],
            "multiplicities": [int(v) for v in self.multiplicities],
            "lam_plus": self.lam_plus,
            "lam_minus": self.lam_minus,
            "lam": self.lam,
            "hyperbolic": self.hyperbolic,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "LyapunovSpectrum":
        return cls(np.array(rec["exponents"], float), np.array(rec["multiplicities"], int))


def spectrum_from_values(values, gap_tol: float = GAP_TOL) -> LyapunovSpectrum:
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    groups: list[list[float]] = []
    for v in vals:
        if groups and groups[-1][-1] - v < gap_tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return LyapunovSpectrum(
        np.array([np.mean(g) for g in groups]),
        np.array([len(g) for g in groups]),
        gap_tol,
        vals,
    )


def lyapunov_exponents(
    fmap: MapModel,
    p,
    n_iters: int = 10_000,
    transient: int = 100,
    gap_tol: float = GAP_TOL,
    conv_tol: float = 1e-3,
) -> LyapunovSpectrum:
    """Exponents along the forward orbit of ``p`` by QR reorthonormalisation.

    The first ``transient`` steps only align the frame and are not counted.
    """
    if n_iters < 100:
        raise ValueError("n_iters must be >= 100")
    d = fmap.dimension
    x = wrap(p)
    q = np.eye(d)
    for _ in range(transient):
        q, _ = np.linalg.qr(fmap.jacobian(x) @ q)
        x = fmap.eval(x)
    sums = np.zeros(d)
    tail_len = max(n_iters // 10, 1)
    tail = np.empty((tail_len, d))
    with np.errstate(divide="ignore"):
        for i in range(n_iters):
            q, r = np.linalg.qr(fmap.jacobian(x) @ q)
            sums += np.log(np.abs(np.diag(r)))
            x = fmap.eval(x)
            j = i - (n_iters - tail_len)
            if j >= 0:
                tail[j] = sums / (i + 1)
    finite = np.all(np.isfinite(tail), axis=0)
    spread = np.ptp(tail[:, finite], axis=0) if finite.any() else np.zeros(0)
    if spread.size and spread.max() > conv_tol:
        raise NonConvergence(f"running estimates still moving by {spread.max():.3g}")
    return spectrum_from_values(sums / n_iters, gap_tol)


# -- Oseledec frames ---------------------------------------------------------


def _orth(mat):
    q, r = np.linalg.qr(mat)
    return q, r


def _init_basis(d: int, k: int) -> np.ndarray:
    # fixed generic start so results are reproducible
    rng = np.random.default_rng(12345)
    return np.linalg.qr(rng.standard_normal((d, d)))[0][:, :k]


def _frames(jac: np.ndarray, du: int):
    """Unstable/stable orthonormal frames for stacked Jacobians (..., T, d, d)."""
    T, d = jac.shape[-3], jac.shape[-1]
    batch = jac.shape[:-3]
    ds = d - du
    U = np.empty(batch + (T, d, du))
    S = np.empty(batch + (T, d, ds))
    if du:
        U[..., 0, :, :] = _init_basis(d, du)
        for k in range(T - 1):
            U[..., k + 1, :, :] = _orth(jac[..., k, :, :] @ U[..., k, :, :])[0]
    if ds:
        if du:
            Z = np.empty(batch + (T, d, du))
            Z[..., T - 1, :, :] = _init_basis(d, du)
            for k in range(T - 2, -1, -1):
                Z[..., k, :, :] = _orth(np.swapaxes(jac[..., k, :, :], -1, -2) @ Z[..., k + 1, :, :])[0]
            full = np.linalg.qr(Z, mode="complete")[0]
            S[...] = full[..., :, du:]
        else:
            S[...] = np.eye(d)
    return U, S


@dataclass
class SplittingFrame:
    unstable: np.ndarray  # (n, d, du)
    stable: np.ndarray  # (n, d, ds)
    angles: np.ndarray  # (n,) radians between E^u and E^s
    residual: float  # worst invariance residual

    @property
    def du(self) -> int:
        return self.unstable.shape[-1]


def _angles(U, S):
    if U.shape[-1] == 0 or S.shape[-1] == 0:
        return np.full(U.shape[:-2], np.pi / 2)
    cos = np.linalg.svd(np.swapaxes(U, -1, -2) @ S, compute_uv=False)[..., 0]
    return np.arccos(np.clip(cos, 0.0, 1.0))


def _invariance_residual(jac, B):
    if B.shape[-1] == 0:
        return 0.0
    img = jac[..., :-1, :, :] @ B[..., :-1, :, :]
    nxt = B[..., 1:, :, :]
    perp = img - nxt @ (np.swapaxes(nxt, -1, -2) @ img)
    scale = np.linalg.norm(img, axis=(-2, -1))
    return float(np.max(np.linalg.norm(perp, axis=(-2, -1)) / np.maximum(scale, 1e-300)))


def _check_unstable_blocks(jac, U, kernel_tol=1e-10):
    if U.shape[-1] == 0:
        return
    img = jac[..., :-1, :, :] @ U[..., :-1, :, :]
    sv = np.linalg.svd(img, compute_uv=False)
    if np.any(sv[..., -1] <= kernel_tol * np.maximum(sv[..., 0], 1.0)):
        raise SingularUnstable("Jacobian collapses a direction of the unstable block")


def oseledec_splitting(cw: CocycleWindow, du: int | None = None) -> SplittingFrame:
    """Invariant E^u/E^s along the window.

    E^u is pushed forward from the left edge, E^s is the orthogonal
    complement of the dominant subspace of the transposed products pulled
    back from the right edge.  Both are exactly invariant by construction;
    their accuracy improves away from the edges.
    """
    if du is None:
        du = _window_unstable_dim(cw.matrices)
    U, S = _frames(cw.matrices, du)
    _check_unstable_blocks(cw.matrices, U)
    res = max(_invariance_residual(cw.matrices, U), _invariance_residual(cw.matrices, S))
    return SplittingFrame(U, S, _angles(U, S), res)


def _window_unstable_dim(jac) -> int:
    d = jac.shape[-1]
    q = np.eye(d)
    sums = np.zeros(d)
    with np.errstate(divide="ignore"):
        for a in jac:
            q, r = np.linalg.qr(a @ q)
            sums += np.log(np.abs(np.diag(r)))
    return int(np.sum(sums / len(jac) > 0))


# -- Lyapunov inner products -------------------------------------------------


@dataclass
class LyapunovForms:
    """Adapted inner products in frame coordinates at each window index."""

    Gu: np.ndarray  # (n, du, du)
    Gs: np.ndarray  # (n, ds, ds)
    tail_u: np.ndarray  # (n,) last summed term relative to the sum
    tail_s: np.ndarray
    valid: np.ndarray  # (n,) bool
    lam: float
    eps: float


def _restricted_blocks(jac, U, S):
    """R^u_k = U_{k+1}^T A_k U_k and R^s_k likewise; shapes (..., T-1, .., ..)."""
    A = jac[..., :-1, :, :]
    Ru = np.swapaxes(U[..., 1:, :, :], -1, -2) @ A @ U[..., :-1, :, :]
    Rs = np.swapaxes(S[..., 1:, :, :], -1, -2) @ A @ S[..., :-1, :, :]
    return Ru, Rs


def _rel(term, total):
    nt = np.linalg.norm(term, axis=(-2, -1)) if term.shape[-1] else np.zeros(term.shape[:-2])
    ng = np.linalg.norm(total, axis=(-2, -1)) if total.shape[-1] else np.ones(total.shape[:-2])
    return nt / np.maximum(ng, 1e-300)


def _forms_recursive(Ru, Rs, c):
    """Full-history sums: G^u from the left edge, G^s from the right edge."""
    T = Ru.shape[-3] + 1
    du, ds = Ru.shape[-1], Rs.shape[-1]
    batch = Ru.shape[:-3]
    Gu = np.empty(batch + (T, du, du))
    Tu = np.empty_like(Gu)
    Gs = np.empty(batch + (T, ds, ds))
    Ts = np.empty_like(Gs)
    Gu[..., 0, :, :] = np.eye(du)
    Tu[..., 0, :, :] = np.eye(du)
    if du:
        Rinv = np.linalg.inv(Ru)
        RinvT = np.swapaxes(Rinv, -1, -2)
        for k in range(T - 1):
            Tu[..., k + 1, :, :] = c * RinvT[..., k, :, :] @ Tu[..., k, :, :] @ Rinv[..., k, :, :]
            Gu[..., k + 1, :, :] = np.eye(du) + c * RinvT[..., k, :, :] @ Gu[..., k, :, :] @ Rinv[..., k, :, :]
    Gs[..., T - 1, :, :] = np.eye(ds)
    Ts[..., T - 1, :, :] = np.eye(ds)
    if ds:
        RsT = np.swapaxes(Rs, -1, -2)
        for k in range(T - 2, -1, -1):
            Ts[..., k, :, :] = c * RsT[..., k, :, :] @ Ts[..., k + 1, :, :] @ Rs[..., k, :, :]
            Gs[..., k, :, :] = np.eye(ds) + c * RsT[..., k, :, :] @ Gs[..., k + 1, :, :] @ Rs[..., k, :, :]
    return Gu, Tu, Gs, Ts


def _forms_truncated(Ru, Rs, c, horizon):
    """Explicit sums over m in [0, horizon] at every index that has room."""
    T = Ru.shape[0] + 1
    du, ds = Ru.shape[-1], Rs.shape[-1]
    Gu = np.full((T, du, du), np.nan)
    Gs = np.full((T, ds, ds), np.nan)
    tu = np.full(T, np.inf)
    ts = np.full(T, np.inf)
    for k in range(horizon, T - horizon):
        gu, g = np.eye(du), np.eye(du)  # g: (D^{-m})^T D^{-m} weighted
        back = np.eye(du)
        for m in range(1, horizon + 1):
            back = back @ np.linalg.inv(Ru[k - m])
            g = c**m * back.T @ back
            gu = gu + g
        Gu[k], tu[k] = gu, _rel(g, gu) if du else 0.0
        gs, g = np.eye(ds), np.eye(ds)
        fwd = np.eye(ds)
        for m in range(horizon):
            fwd = Rs[k + m] @ fwd
            g = c ** (m + 1) * fwd.T @ fwd
            gs = gs + g
        Gs[k], ts[k] = gs, _rel(g, gs) if ds else 0.0
    return Gu, tu, Gs, ts


def lyapunov_inner_product(
    cw: CocycleWindow,
    frame: SplittingFrame,
    lam: float,
    eps: float,
    horizon: int | None = None,
    tail_tol: float = TAIL_TOL,
) -> LyapunovForms:
    """Adapted inner products on E^u and E^s at every window index.

    Unstable sum: sum_m |D^{-m} u|^2 e^{2 m lam} e^{-2 eps m}, backward factors.
    Stable sum:   sum_m |D^{m} v|^2 e^{2 m lam} e^{-2 eps m}, forward factors.

    ``horizon=None`` sums all history available inside the window;
    otherwise exactly ``horizon`` terms per side, only where they fit.
    Raises DivergentSeries when no index meets the tail criterion.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    Ru, Rs = _restricted_blocks(cw.matrices, frame.unstable, frame.stable)
    c = np.exp(2.0 * (lam - eps))
    if horizon is None:
        Gu, Tu, Gs, Ts = _forms_recursive(Ru, Rs, c)
        tail_u, tail_s = _rel(Tu, Gu), _rel(Ts, Gs)
        if Ru.shape[-1] == 0:
            tail_u = np.zeros(len(Gu))
        if Rs.shape[-1] == 0:
            tail_s = np.zeros(len(Gs))
    else:
        if horizon > cw.radius:
            raise ValueError("horizon exceeds the window radius")
        Gu, tail_u, Gs, tail_s = _forms_truncated(Ru, Rs, c, horizon)
    valid = (tail_u <= tail_tol) & (tail_s <= tail_tol)
    if not valid.any():
        raise DivergentSeries(
            f"tail term too large everywhere (best {np.maximum(tail_u, tail_s).min():.3g}); "
            "use a longer window or a larger eps"
        )
    return LyapunovForms(Gu, Gs, tail_u, tail_s, valid, lam, eps)


# -- charts ------------------------------------------------------------------


def _sqrtm_spd(G):
    if G.shape[-1] == 0:
        return G.copy(), G.copy()
    w, v = np.linalg.eigh(G)
    w = np.maximum(w, 1e-300)
    vt = np.swapaxes(v, -1, -2)
    return (v * np.sqrt(w)[..., None, :]) @ vt, (v / np.sqrt(w)[..., None, :]) @ vt


def _block_diag(a, b):
    du, ds = a.shape[-1], b.shape[-1]
    out = np.zeros(a.shape[:-2] + (du + ds, du + ds))
    out[..., :du, :du] = a
    out[..., du:, du:] = b
    return out


@dataclass
class LyapunovChart:
    """Lyapunov coordinate changes along a contiguous run of orbit points.

    ``points[i]`` is source index ``offset + i``.  ``blocks[i]`` is
    ``C[i+1] Df(points[i]) C[i]^{-1}``.
    """

    points: np.ndarray  # (n, d)
    C: np.ndarray  # (n, d, d)
    Cinv: np.ndarray
    blocks: np.ndarray  # (n-1, d, d)
    du: int
    lam: float
    eta: float
    offset: int = 0
    xi: np.ndarray | None = None
    norms: np.ndarray = field(init=False)  # (n,) max(|C|, |C^-1|)

    def __post_init__(self):
        sv = np.linalg.svd(self.C, compute_uv=False)
        self.norms = np.maximum(sv[:, 0], 1.0 / sv[:, -1])

    @property
    def K(self) -> float:
        return float(self.norms.max())

    def __len__(self):
        return len(self.points)

    def block_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """(min co-norm of A^1, norm of A^2) per step."""
        du = self.du
        a1 = self.blocks[:, :du, :du]
        a2 = self.blocks[:, du:, du:]
        co = np.linalg.svd(a1, compute_uv=False)[:, -1] if du else np.full(len(self.blocks), np.inf)
        nr = np.linalg.svd(a2, compute_uv=False)[:, 0] if a2.shape[-1] else np.zeros(len(self.blocks))
        return co, nr

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "du": self.du,
            "lam": self.lam,
            "eta": self.eta,
            "K": self.K,
            "points": self.points.tolist(),
            "C": self.C.tolist(),
            "xi": None if self.xi is None else self.xi.tolist(),
        }


def _largest_run(mask: np.ndarray) -> tuple[int, int]:
    best, start, lo_hi = 0, None, (0, -1)
    for i, ok in enumerate(list(mask) + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > best:
                best, lo_hi = i - start, (start, i - 1)
            start = None
    return lo_hi


def _assemble_chart(points, jac, U, S, Gu, Gs, lam, eta, offset, cond_max, block_tol):
    du = U.shape[-1]
    su, su_inv = _sqrtm_spd(Gu)
    ss, ss_inv = _sqrtm_spd(Gs)
    basis = np.concatenate([U, S], axis=-1)
    basis_inv = np.linalg.inv(basis)
    C = _block_diag(su, ss) @ basis_inv
    Cinv = basis @ _block_diag(su_inv, ss_inv)
    cond = np.linalg.cond(C)
    if np.any(cond > cond_max):
        raise IllConditioned(f"coordinate change condition number {cond.max():.3g} > {cond_max:.3g}")
    blocks = C[1:] @ jac[:-1] @ Cinv[:-1]
    off = np.concatenate(
        [blocks[:, :du, du:].reshape(len(blocks), -1), blocks[:, du:, :du].reshape(len(blocks), -1)], axis=1
    )
    scale = np.linalg.norm(blocks, axis=(-2, -1))
    leak = np.max(np.abs(off), axis=1, initial=0.0) / scale if len(blocks) else np.zeros(0)
    if leak.size and leak.max() > block_tol:
        raise IllConditioned(f"off-block leakage {leak.max():.3g} exceeds {block_tol:.3g}")
    blocks[:, :du, du:] = 0.0
    blocks[:, du:, :du] = 0.0
    chart = LyapunovChart(points, C, Cinv, blocks, du, lam, eta, offset)
    co, nr = chart.block_bounds()
    slack = 1e-9
    assert np.all(co >= np.exp(lam - eta) * (1 - slack)), "unstable block bound violated"
    assert np.all(nr <= np.exp(-lam + eta) * (1 + slack)), "stable block bound violated"
    return chart


def coordinate_change(
    forms: LyapunovForms,
    frame: SplittingFrame,
    cw: CocycleWindow,
    eta: float | None = None,
    cond_max: float = COND_MAX,
    block_tol: float = BLOCK_TOL,
) -> LyapunovChart:
    """C_k = diag(sqrt(G^u_k), sqrt(G^s_k)) [U_k S_k]^{-1} on the longest valid run."""
    lo, hi = _largest_run(forms.valid)
    sl = slice(lo, hi + 1)
    eta = forms.eps if eta is None else eta
    return _assemble_chart(
        cw.window.points[sl],
        cw.matrices[sl],
        frame.unstable[sl],
        frame.stable[sl],
        forms.Gu[sl],
        forms.Gs[sl],
        forms.lam,
        eta,
        lo - cw.radius,
        cond_max,
        block_tol,
    )


def chart_orbit(
    fmap: MapModel,
    orbit: np.ndarray,
    spectrum: LyapunovSpectrum,
    eta: float,
    tail_tol: float = TAIL_TOL,
    holder: tuple[float, float] | None = None,
    cond_max: float = COND_MAX,
) -> LyapunovChart:
    """Charts along a stored true orbit (T, d), trimmed to indices whose
    adapted sums have converged.  Chart radii are attached when ``holder``
    (or the map's analytic data) is available."""
    orbit = np.asarray(orbit, dtype=float)
    if not spectrum.hyperbolic:
        raise EmptyBlock("spectrum is not hyperbolic")
    lam, du = spectrum.lam, spectrum.unstable_dim
    jac = fmap.jacobian(orbit)
    U, S = _frames(jac, du)
    _check_unstable_blocks(jac, U)
    Ru, Rs = _restricted_blocks(jac, U, S)
    Gu, Tu, Gs, Ts = _forms_recursive(Ru, Rs, np.exp(2.0 * (lam - eta)))
    valid = (_rel(Tu, Gu) <= tail_tol if du else True) & (_rel(Ts, Gs) <= tail_tol if Rs.shape[-1] else True)
    valid = np.broadcast_to(valid, (len(orbit),))
    if not valid.any():
        raise DivergentSeries("orbit too short for the adapted sums to converge")
    lo, hi = _largest_run(valid)
    sl = slice(lo, hi + 1)
    chart = _assemble_chart(orbit[sl], jac[sl], U[sl], S[sl], Gu[sl], Gs[sl], lam, eta, lo, cond_max, BLOCK_TOL)
    chart.xi = chart_radius(chart, holder if holder is not None else fmap.holder)
    return chart


def chart_norms_batch(
    fmap: MapModel,
    orbits: np.ndarray,
    spectrum: LyapunovSpectrum,
    eta: float,
    tail_tol: float = TAIL_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """max(|C_k|, |C_k^{-1}|) for stacked orbits (B, T, d), plus a validity mask.

    Same construction as ``chart_orbit`` but keeps only the norms, so that
    millions of sample points fit in memory.
    """
    lam, du = spectrum.lam, spectrum.unstable_dim
    jac = fmap.jacobian(orbits)
    U, S = _frames(jac, du)
    Ru, Rs = _restricted_blocks(jac, U, S)
    Gu, Tu, Gs, Ts = _forms_recursive(Ru, Rs, np.exp(2.0 * (lam - eta)))
    valid = np.ones(orbits.shape[:2], dtype=bool)
    if du:
        valid &= _rel(Tu, Gu) <= tail_tol
    if Rs.shape[-1]:
        valid &= _rel(Ts, Gs) <= tail_tol
    su, _ = _sqrtm_spd(Gu)
    ss, _ = _sqrtm_spd(Gs)
    C = _block_diag(su, ss) @ np.linalg.inv(np.concatenate([U, S], axis=-1))
    sv = np.linalg.svd(C, compute_uv=False)
    return np.maximum(sv[..., 0], 1.0 / sv[..., -1]), valid


# -- Pesin blocks and chart radii --------------------------------------------


def in_block(norms: np.ndarray, center: int, K: float, eta: float, radius: int | None = None) -> bool:
    """max(|C|,|C^-1|) <= K at ``center`` and <= K e^{eta |n|} at center + n."""
    n = len(norms)
    lo = 0 if radius is None else max(0, center - radius)
    hi = n if radius is None else min(n, center + radius + 1)
    idx = np.arange(lo, hi)
    return bool(np.all(norms[idx] <= K * np.exp(eta * np.abs(idx - center))))


def pesin_block(
    fmap: MapModel,
    sample_windows: list[OrbitWindow],
    eta: float,
    K: float,
    spectrum: LyapunovSpectrum | None = None,
) -> list[OrbitWindow]:
    """Sampled windows whose charts satisfy the block bounds with constant K."""
    if eta <= 0 or K <= 1:
        raise ValueError("need eta > 0 and K > 1")
    if not sample_windows:
        raise EmptyBlock("no samples")
    if spectrum is None:
        spectrum = lyapunov_exponents(fmap, sample_windows[0].center, 2000)
    if not spectrum.hyperbolic:
        raise EmptyBlock("spectrum is not hyperbolic: no uniformity block exists")
    out = []
    for w in sample_windows:
        try:
            chart = chart_orbit(fmap, w.points, spectrum, eta)
        except (DivergentSeries, IllConditioned):
            continue
        center = w.radius - chart.offset
        if 0 <= center < len(chart) and in_block(chart.norms, center, K, eta):
            out.append(w)
    if not out:
        raise EmptyBlock(f"no sample qualifies with K={K}, eta={eta}")
    return out


def chart_radius(chart: LyapunovChart, holder: tuple[float, float], max_radius: float = MAX_CHART_RADIUS) -> np.ndarray:
    """Raw radii delta_k tempered to xi_k = min_j delta_{k+j} e^{eta |j|}.

    delta_k = (L |C_{k+1}| |C_k^{-1}|^{1+alpha} / eta)^{-1/alpha}; the last
    index reuses the previous delta.  Radii are capped at ``max_radius``.
    """
    alpha, L = holder
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    eta = chart.eta
    nC = np.linalg.norm(chart.C, ord=2, axis=(-2, -1))
    nCi = np.linalg.norm(chart.Cinv, ord=2, axis=(-2, -1))
    n = len(chart)
    if L <= 0:
        return np.full(n, max_radius)
    nxt = np.append(nC[1:], nC[-1]) if n > 1 else nC
    delta = (L * nxt * nCi ** (1 + alpha) / eta) ** (-1.0 / alpha)
    delta = np.minimum(delta, max_radius)
    grow = np.exp(eta)
    xi = delta.copy()
    for k in range(1, n):
        xi[k] = min(xi[k], xi[k - 1] * grow)
    for k in range(n - 2, -1, -1):
        xi[k] = min(xi[k], xi[k + 1] * grow)
    return xi


def estimate_holder(fmap: MapModel, alpha: float = 1.0, n_pairs: int = 2000, scale: float = 1e-3, seed: int = 0):
    """Empirical Holder constant of Df over random close pairs, times 2."""
    rng = np.random.default_rng(seed)
    x = rng.random((n_pairs, fmap.dimension))
    h = rng.standard_normal((n_pairs, fmap.dimension))
    h *= scale * rng.random((n_pairs, 1)) / np.linalg.norm(h, axis=1, keepdims=True)
    diff = np.linalg.norm(fmap.jacobian(x + h) - fmap.jacobian(x), ord=2, axis=(-2, -1))
    return alpha, 2.0 * float(np.max(diff / np.linalg.norm(h, axis=1) ** alpha))


def displacement(a, b):
    """Re-export of the torus nearest-image difference for chart maps."""
    return torus_delta(a, b)
