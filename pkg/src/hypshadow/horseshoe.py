"""Horseshoes from a hyperbolic measure by the Bowen-ball / return-time argument.

Pipeline: sample the Pesin block along long orbits, keep points that
return to a small cover ball after n steps, extract an (N1, rho)-separated
set of returners, pick the best return time N and the most populated
ball, then shadow every cyclic word over that alphabet by a genuine
periodic orbit.  The self-loop-free full shift on l symbols has entropy
log(l - 1), so the horseshoe has entropy at least log(l - 1)/N.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .cocycle import LyapunovSpectrum, chart_norms_batch, lyapunov_exponents
from .errors import (
    AlphabetTooSmall,
    ConfigError,
    EmptyReturnClass,
    HypShadowError,
    InsufficientSamples,
    RepeatedSymbol,
)
from .mapmodel import MapModel, torus_delta, torus_dist, wrap
from .shadow import (
    PeriodicOrbit,
    PseudoOrbit,
    chart_pseudo_orbit,
    jump_pseudo_orbit,
    shadow_periodic,
    shadow_pseudo_orbit,
)


@dataclass
class HorseshoeParams:
    eta: float = 0.2
    rho: float = 0.4
    eps1: float = 0.01
    eps2: float = 0.045
    gamma: float = 0.1
    delta: float = 0.3
    N1: int = 10
    t: int | None = None  # cover cardinality; derived from eps2 when None
    n_orbits: int = 2000
    orbit_length: int = 2500
    burn_in: int = 100
    block_mass: float = 0.9
    max_symbols: int = 4
    seed: int = 0

    def validate(self, entropy: float | None = None):
        if not 0 < self.eta:
            raise ConfigError("eta must be positive")
        if not 0 < self.rho or not 0 < self.eps2:
            raise ConfigError("rho and eps2 must be positive")
        bound = self.delta / 4
        if entropy is not None:
            bound = min(bound, self.gamma / (2 * entropy + 4))
        if not 0 < self.eps1 < bound:
            raise ConfigError(f"eps1 must lie in (0, {bound:.4g})")
        if self.N1 < 1 or self.max_symbols < 2:
            raise ConfigError("need N1 >= 1 and max_symbols >= 2")
        if not 0 < self.block_mass <= 1:
            raise ConfigError("block_mass must lie in (0, 1]")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# -- sampling the block ------------------------------------------------------


@dataclass
class BlockSample:
    """Long orbits stored time-major: ``orbits[t, b]`` is step t of orbit b."""

    orbits: np.ndarray  # (T, B, d)
    K_block: float
    mass: float  # fraction of tested points inside the block
    pad: int  # chart padding kept at both ends of every orbit

    @property
    def usable(self) -> slice:
        return slice(self.pad, self.orbits.shape[0] - self.pad)


def sample_orbits(fmap: MapModel, n_orbits: int, length: int, burn_in: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.random((n_orbits, fmap.dimension))
    for _ in range(burn_in):
        x = fmap.eval(x)
    out = np.empty((length, n_orbits, fmap.dimension))
    for i in range(length):
        out[i] = x
        x = fmap.eval(x)
    return out


def _windows(orbits: np.ndarray, times: np.ndarray, cols: np.ndarray, pad: int, extra: int = 0) -> np.ndarray:
    """Stacked orbit windows (len(times), 2 pad + extra + 1, d) around (t, b)."""
    offs = np.arange(-pad, pad + extra + 1)
    return np.swapaxes(orbits[times[None, :] + offs[:, None], cols[None, :]], 0, 1)


def block_norms(fmap, orbits, times, cols, spectrum, eta, pad, extra=0, chunk=4000):
    """Chart norms on windows around the given samples; NaN where not converged."""
    out = np.empty((len(times), 2 * pad + extra + 1))
    for s in range(0, len(times), chunk):
        w = _windows(orbits, times[s : s + chunk], cols[s : s + chunk], pad, extra)
        nrm, ok = chart_norms_batch(fmap, w, spectrum, eta)
        out[s : s + chunk] = np.where(ok, nrm, np.nan)
    return out


def _tempered_ok(norms: np.ndarray, centers, K: float, eta: float, reach: int) -> np.ndarray:
    """Block test |C| <= K e^{eta |j|} for |j| <= reach around each centre column."""
    ok = np.ones(len(norms), dtype=bool)
    for c in np.atleast_1d(centers):
        for j in range(-reach, reach + 1):
            ok &= norms[:, c + j] <= K * np.exp(eta * abs(j))
    return ok


def sample_block(fmap: MapModel, spectrum: LyapunovSpectrum, params: HorseshoeParams) -> BlockSample:
    """Orbit samples plus the chart-norm level K that keeps ``block_mass`` of them."""
    from .shadow import chart_padding

    pad = chart_padding(params.eta)
    T = params.orbit_length + 2 * pad
    orbits = sample_orbits(fmap, params.n_orbits, T, params.burn_in, params.seed)
    rng = np.random.default_rng(params.seed + 1)
    m = min(2000, params.n_orbits * params.orbit_length)
    times = rng.integers(pad, T - pad, m)
    cols = rng.integers(0, params.n_orbits, m)
    norms = block_norms(fmap, orbits, times, cols, spectrum, params.eta, pad)[:, pad]
    norms = norms[np.isfinite(norms)]
    if len(norms) == 0:
        raise InsufficientSamples("no sample has converged charts")
    K = float(np.quantile(norms, params.block_mass))
    return BlockSample(orbits, K, float(np.mean(norms <= K)), pad)


# -- covering and packing ----------------------------------------------------


def _segments(fmap: MapModel, points: np.ndarray, n: int) -> np.ndarray:
    """(M, max(n,1), d) forward segments x, f x, ..., f^{n-1} x."""
    return np.swapaxes(fmap.iterate(np.asarray(points, dtype=float), max(n, 1) - 1), 0, 1)


def _bowen_dist(seg: np.ndarray, segs: np.ndarray) -> np.ndarray:
    return np.max(torus_dist(segs, seg[None]), axis=1)


def bowen_ball_count(fmap: MapModel, samples: np.ndarray, n: int, rho: float, mass_fraction: float = 1.0) -> int:
    """Greedy number of (n, rho)-Bowen balls covering ``mass_fraction`` of the samples.

    Lowest uncovered index becomes the next centre.  n = 0 is the plain
    rho-ball cover.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    M = len(samples)
    if M == 0:
        raise InsufficientSamples("empty sample set")
    segs = _segments(fmap, samples, n)
    covered = np.zeros(M, dtype=bool)
    need = math.ceil(mass_fraction * M - 1e-12)
    count = 0
    while covered.sum() < need:
        i = int(np.argmin(covered))
        covered |= _bowen_dist(segs[i], segs) < rho
        count += 1
    if count == M and M > 1 and n > 0:
        raise InsufficientSamples("every sample needed its own ball; sample more densely")
    return count


@dataclass
class SeparatedSet:
    indices: np.ndarray  # into the candidate list
    segments: np.ndarray  # (k, n, d)
    n: int
    rho: float

    @property
    def points(self) -> np.ndarray:
        return self.segments[:, 0]

    def __len__(self):
        return len(self.indices)


def maximal_separated_set(
    samples: np.ndarray,
    n: int,
    rho: float,
    fmap: MapModel | None = None,
    orbit_ids: np.ndarray | None = None,
    times: np.ndarray | None = None,
) -> SeparatedSet:
    """Greedy maximal (n, rho)-separated subset in sample order.

    ``samples`` is either points (M, d) with ``fmap`` to iterate, or
    precomputed segments (M, n, d).  With ``orbit_ids``/``times`` a sample
    is also skipped when another chosen sample from the same orbit lies
    within n steps of it, so no two members share an orbit segment.
    """
    samples = np.asarray(samples, dtype=float)
    segs = samples if samples.ndim == 3 else _segments(fmap, samples, n)
    chosen: list[int] = []
    taken_ids: dict[int, list[int]] = {}
    for i in range(len(segs)):
        if orbit_ids is not None:
            near = taken_ids.get(int(orbit_ids[i]), [])
            if any(abs(int(times[i]) - t) <= n for t in near):
                continue
        if chosen and np.min(_bowen_dist(segs[i], segs[chosen])) < rho:
            continue
        chosen.append(i)
        if orbit_ids is not None:
            taken_ids.setdefault(int(orbit_ids[i]), []).append(int(times[i]))
    idx = np.array(chosen, dtype=int)
    return SeparatedSet(idx, segs[idx], n, rho)


# -- cover of the torus by eps2-balls ----------------------------------------


@dataclass
class GridCover:
    """Balls of radius eps2 centred on a cubic grid fine enough to cover the torus."""

    eps2: float
    d: int

    @property
    def spacing(self) -> float:
        return 1.0 / math.ceil(1.0 / (2.0 * self.eps2 / math.sqrt(self.d)))

    @property
    def per_axis(self) -> int:
        return round(1.0 / self.spacing)

    @property
    def t(self) -> int:
        return self.per_axis**self.d

    def center(self, ball: int) -> np.ndarray:
        idx = np.unravel_index(ball, (self.per_axis,) * self.d)
        return (np.array(idx) + 0.5) * self.spacing

    def common_ball(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Lowest-index ball containing both p[i] and q[i], or -1."""
        h, m = self.spacing, self.per_axis
        cell = np.floor(wrap(p) / h).astype(int)
        best = np.full(len(p), -1)
        for shift in itertools.product((-1, 0, 1), repeat=self.d):
            c = (cell + shift) % m
            cen = (c + 0.5) * h
            inside = (torus_dist(p, cen) < self.eps2) & (torus_dist(q, cen) < self.eps2)
            ids = np.ravel_multi_index(tuple(c.T), (m,) * self.d)
            better = inside & ((best < 0) | (ids < best))
            best[better] = ids[better]
        return best


# -- return class and alphabet -----------------------------------------------


@dataclass
class ReturnClass:
    N: int
    members: np.ndarray  # indices into the separated set
    balls: np.ndarray  # common ball per member
    counts: dict[int, int]  # #V_n per candidate n


def select_return_class(sepset: SeparatedSet, fmap: MapModel, cover: GridCover, N1: int, eps2: float) -> ReturnClass:
    """N in [N1, ceil((1+eps2) N1)] maximising #V_n, where V_n holds the
    members whose 0th and n-th iterates share a cover ball."""
    hi = math.ceil((1 + eps2) * N1)
    pts = sepset.points
    counts, best = {}, None
    for n in range(N1, hi + 1):
        img = fmap.iterate(pts, n)[-1] if len(pts) else pts
        balls = cover.common_ball(pts, img)
        members = np.nonzero(balls >= 0)[0]
        counts[n] = int(len(members))
        if best is None or len(members) > len(best[1]):
            best = (n, members, balls[members])
    if best is None or len(best[1]) == 0:
        raise EmptyReturnClass(f"no separated point returns within [{N1}, {hi}]; increase N1 or sampling")
    return ReturnClass(best[0], best[1], best[2], counts)


@dataclass
class Alphabet:
    points: np.ndarray  # (l, d) symbols y_1..y_l
    N: int
    center: np.ndarray
    eps2: float
    ball: int
    full_size: int  # |ball ∩ V_N| before any cap

    @property
    def l(self) -> int:
        return len(self.points)


def select_alphabet(
    rc: ReturnClass, sepset: SeparatedSet, cover: GridCover, eps2: float, max_symbols: int | None = None
) -> Alphabet:
    """Most populated cover ball (lowest id on ties); alphabet = ball ∩ V_N."""
    if len(rc.members) == 0:
        raise EmptyReturnClass("empty return class")
    ids, cnt = np.unique(rc.balls, return_counts=True)
    ball = int(ids[np.argmax(cnt)])
    sel = rc.members[rc.balls == ball]
    full = len(sel)
    if max_symbols is not None:
        sel = sel[:max_symbols]
    if len(sel) < 2:
        raise AlphabetTooSmall(f"best ball holds {len(sel)} symbol(s)")
    return Alphabet(sepset.points[sel], rc.N, cover.center(ball), eps2, ball, full)


# -- words and pseudo-orbits -------------------------------------------------


def cyclic_words(l: int, max_len: int) -> list[tuple[int, ...]]:
    """Cyclic words with distinct consecutive symbols (also across the wrap),
    one representative per rotation class, lengths 2..max_len."""
    out = []
    for m in range(2, max_len + 1):
        for w in itertools.product(range(l), repeat=m):
            if any(w[i] == w[(i + 1) % m] for i in range(m)):
                continue
            if w == min(w[i:] + w[:i] for i in range(m)) and not _is_power(w):
                out.append(w)
    return out


def _is_power(w) -> bool:
    m = len(w)
    return any(m % p == 0 and w == w[:p] * (m // p) for p in range(1, m))


def build_pseudo_orbit(fmap: MapModel, alpha: Alphabet, word, cyclic: bool = True) -> PseudoOrbit:
    """Concatenation of the length-N true segments of the word's symbols."""
    word = tuple(int(s) for s in word)
    if not word:
        raise ValueError("empty word")
    m = len(word)
    pairs = range(m) if cyclic and m > 1 else range(m - 1)
    if any(word[i] == word[(i + 1) % m] for i in pairs):
        raise RepeatedSymbol(f"consecutive repeated symbol in {word}")
    N = alpha.N
    pieces = [np.swapaxes(fmap.iterate(alpha.points[s][None], N - 1), 0, 1)[0] for s in word]
    starts = [i * N for i in range(m)]
    return PseudoOrbit(np.vstack(pieces), starts, cyclic)


# -- proximity of orbit measures ---------------------------------------------


def coordinate_test_functions(d: int):
    """sin and cos of 2 pi x_i: smooth functions on the torus."""
    fns = []
    for i in range(d):
        fns.append(lambda x, i=i: np.sin(2 * np.pi * x[..., i]))
        fns.append(lambda x, i=i: np.cos(2 * np.pi * x[..., i]))
    return fns


def birkhoff_averages(fmap: MapModel, x0, n: int, test_functions) -> np.ndarray:
    orb = fmap.iterate(wrap(x0), n - 1)
    return np.array([float(np.mean(phi(orb))) for phi in test_functions])


@dataclass
class ProximityReport:
    deviations: list[float]
    gamma: float

    @property
    def passed(self) -> bool:
        return all(v < self.gamma for v in self.deviations)

    def to_dict(self) -> dict:
        return {"deviations": self.deviations, "gamma": self.gamma, "passed": self.passed}


def measure_proximity_check(orbits, test_functions, reference_averages, gamma: float) -> ProximityReport:
    """sum_i |avg_orbit(phi_i) - ref_i| / 2^i for every periodic orbit (i from 1)."""
    ref = np.asarray(reference_averages, dtype=float)
    w = 0.5 ** np.arange(1, len(ref) + 1)
    devs = []
    for orb in orbits:
        pts = orb.points if hasattr(orb, "points") else np.asarray(orb)
        avg = np.array([float(np.mean(phi(pts))) for phi in test_functions])
        devs.append(float(np.sum(w * np.abs(avg - ref))))
    return ProximityReport(devs, gamma)


# -- the horseshoe -----------------------------------------------------------


@dataclass
class SubshiftCoding:
    l: int
    N: int
    transition: np.ndarray = field(init=False)
    orbits: dict = field(default_factory=dict)  # word -> PeriodicOrbit

    def __post_init__(self):
        self.transition = np.ones((self.l, self.l), dtype=int) - np.eye(self.l, dtype=int)

    @property
    def entropy(self) -> float:
        """log of the spectral radius of the transition matrix, = log(l - 1)."""
        rad = float(np.max(np.abs(np.linalg.eigvals(self.transition))))
        return math.log(rad) if rad > 0 else float("-inf")


@dataclass
class HorseshoeResult:
    coding: SubshiftCoding
    alphabet: Alphabet
    params: HorseshoeParams
    eps2: float  # after clamping
    C_certified: float
    C_calibrated: float
    diagnostics: dict

    @property
    def orbits(self) -> dict:
        return self.coding.orbits

    @property
    def entropy_lower_bound(self) -> float:
        return math.log(self.coding.l - 1) / self.coding.N if self.coding.l > 1 else float("-inf")

    def to_dict(self) -> dict:
        words = {}
        for w, orb in sorted(self.orbits.items()):
            rec = {"residual": orb.residual, "period": orb.period}
            if orb.shadow is not None:
                rec["certified"] = orb.shadow.certified
                rec["max_jump"] = orb.shadow.epsilon
                rec["max_distance"] = float(np.max(orb.shadow.distances))
            words["-".join(map(str, w))] = rec
        return {
            "N": self.coding.N,
            "l": self.coding.l,
            "entropy_lower_bound": self.entropy_lower_bound,
            "subshift_entropy": self.coding.entropy,
            "entropy_note": "self-loops dropped: subshift entropy is log(l-1), not log l",
            "eps2": self.eps2,
            "C_certified": self.C_certified,
            "C_calibrated": self.C_calibrated,
            "alphabet": self.alphabet.points.tolist(),
            "alphabet_full_size": self.alphabet.full_size,
            "words": words,
            "params": self.params.to_dict(),
            "diagnostics": self.diagnostics,
        }


def calibrate_shadow_constant(fmap, spectrum, eta, starts, N, jump, seed=0) -> float:
    """Measured max distance / jump on kicked orbits with a kick every N steps."""
    worst = 0.0
    for k, x in enumerate(starts):
        ps = jump_pseudo_orbit(fmap, x, 4 * N, [N, 2 * N, 3 * N], jump, seed + k)
        ch = chart_pseudo_orbit(fmap, ps, spectrum, eta)
        res = shadow_pseudo_orbit(fmap, ps, ch, certify=False)
        if res.max_residual > 1e-9:
            continue
        worst = max(worst, float(np.max(res.distances)) / res.epsilon)
    return worst


def _orbit_sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    P = math.lcm(len(a), len(b))
    i = np.arange(P)
    return float(np.max(torus_dist(a[i % len(a)], b[i % len(b)])))


def _itinerary(orb: np.ndarray, alpha: Alphabet, fmap: MapModel) -> tuple[int, ...]:
    N = alpha.N
    segs = _segments(fmap, alpha.points, N)
    out = []
    for j in range(len(orb) // N):
        piece = orb[j * N : (j + 1) * N]
        d = np.max(torus_dist(segs, piece[None]), axis=1)
        out.append(int(np.argmin(d)))
    return tuple(out)


def construct_horseshoe(
    fmap: MapModel,
    params: HorseshoeParams | None = None,
    word_length_cap: int = 3,
    workers: int = 1,
    spectrum: LyapunovSpectrum | None = None,
) -> HorseshoeResult:
    params = params or HorseshoeParams()
    if spectrum is None:
        spectrum = lyapunov_exponents(fmap, np.random.default_rng(params.seed).random(fmap.dimension), 10_000)
    h = float(np.sum(spectrum.raw[spectrum.raw > 0]))
    params.validate(h)
    if params.eta >= spectrum.lam:
        raise ConfigError(f"eta must be below lambda = {spectrum.lam:.4g}")
    d = fmap.dimension

    # Step 2: block samples (long-orbit empirical measure)
    block = sample_block(fmap, spectrum, params)
    orbits, pad = block.orbits, block.pad
    T = orbits.shape[0]
    N1 = params.N1

    # Step 4: shadowing scale; a priori constant is reported, measured one clamps
    rng = np.random.default_rng(params.seed + 2)
    probe = orbits[rng.integers(pad, T - pad, 5), rng.integers(0, orbits.shape[1], 5)]
    C_cal = calibrate_shadow_constant(fmap, spectrum, params.eta, probe, N1, params.eps2, params.seed)
    eps2 = params.eps2
    if C_cal > 0 and eps2 >= params.rho / (4 * C_cal):
        eps2 = 0.9 * params.rho / (4 * C_cal)
    cover = GridCover(eps2, d)

    # returners: samples whose n-th iterate shares a cover ball, any n in range
    hi = math.ceil((1 + eps2) * N1)
    t_lo, t_hi = pad, T - pad - hi
    pts = orbits[t_lo:t_hi].reshape(-1, d)
    ret = np.zeros(len(pts), dtype=bool)
    for n in range(N1, hi + 1):
        img = orbits[t_lo + n : t_hi + n].reshape(-1, d)
        close = np.nonzero(~ret & (torus_dist(pts, img) < 2 * eps2))[0]
        ret[close[cover.common_ball(pts[close], img[close]) >= 0]] = True
    cand = np.nonzero(ret)[0]
    times = cand // orbits.shape[1] + t_lo
    cols = cand % orbits.shape[1]
    if len(cand) == 0:
        raise EmptyReturnClass("no sample returns to its cover ball")

    # Birkhoff filter: segment averages of the test functions near the reference
    tfs = coordinate_test_functions(d)
    ref = np.mean([phi(orbits[pad : T - pad].reshape(-1, d)) for phi in tfs], axis=1)
    segs = np.swapaxes(orbits[times[None, :] + np.arange(N1)[:, None], cols[None, :]], 0, 1)
    w = 0.5 ** np.arange(1, len(tfs) + 1)
    dev = sum(wi * np.abs(np.mean(phi(segs), axis=1) - r) for wi, phi, r in zip(w, tfs, ref))
    keep = dev < params.gamma / 2
    times, cols = times[keep], cols[keep]
    if len(times) == 0:
        raise EmptyReturnClass("no returner passes the Birkhoff filter")

    # block membership at both ends of the return (jump endpoints)
    norms = block_norms(fmap, orbits, times, cols, spectrum, params.eta, pad, extra=hi)
    reach = 2
    ends = [pad] + [pad + n for n in range(N1, hi + 1)]
    ok = _tempered_ok(norms, ends, block.K_block, params.eta, reach)
    times, cols = times[ok], cols[ok]
    segs = np.swapaxes(orbits[times[None, :] + np.arange(N1)[:, None], cols[None, :]], 0, 1)

    # Step 5: separated set over returners, best return time
    sep = maximal_separated_set(segs, N1, params.rho, orbit_ids=cols, times=times)
    rc = select_return_class(sep, fmap, cover, N1, eps2)

    # Step 6: alphabet
    alpha = select_alphabet(rc, sep, cover, eps2, params.max_symbols)
    l, N = alpha.l, alpha.N

    # Step 7: realise every cyclic word by a periodic orbit
    words = cyclic_words(l, word_length_cap)

    def realise(word):
        ps = build_pseudo_orbit(fmap, alpha, word)
        ch = chart_pseudo_orbit(fmap, ps, spectrum, params.eta)
        return shadow_periodic(fmap, ps, ch, certify=False)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(realise, words))
    else:
        results = [realise(w) for w in words]
    coding = SubshiftCoding(l, N)
    coding.orbits = dict(zip(words, results))

    # certificates and diagnostics
    C_cert = max((float(o.shadow.C) for o in results if o.shadow is not None and o.shadow.C), default=float("nan"))
    sep_min = min(
        (_orbit_sup_distance(a.points, b.points) for a, b in itertools.combinations(results, 2)),
        default=float("inf"),
    )
    itineraries_ok = all(_itinerary(o.points, alpha, fmap) == w for w, o in coding.orbits.items())
    prox = measure_proximity_check(results, tfs, ref, params.gamma)
    support = cKDTree(orbits[pad : T - pad : 7].reshape(-1, d), boxsize=1.0)
    all_pts = np.vstack([o.points for o in results]) if results else np.zeros((0, d))
    hausdorff_one_side = float(np.max(support.query(wrap(all_pts))[0])) if len(all_pts) else 0.0
    diagnostics = {
        "K_block": block.K_block,
        "block_mass": block.mass,
        "returners": int(len(cand)),
        "returners_filtered": int(keep.sum()),
        "returners_in_block": int(len(times)),
        "separated": int(len(sep)),
        "return_counts": {str(k): v for k, v in rc.counts.items()},
        "cover_t": cover.t,
        "words": len(words),
        "max_residual": max((o.residual for o in results), default=0.0),
        "min_pairwise_distance": sep_min,
        "separation_target": params.rho / 2,
        "itineraries_recovered": bool(itineraries_ok),
        "certified_words": int(sum(bool(o.shadow and o.shadow.certified) for o in results)),
        "count_inequality_rhs": math.exp(N * (h - 2 * params.eps1)) / cover.t,
        "proximity": prox.to_dict(),
        "max_distance_to_samples": hausdorff_one_side,
        "entropy_estimate": h,
    }
    return HorseshoeResult(coding, alpha, params, eps2, C_cert, C_cal, diagnostics)


def safe_construct(*args, **kwargs):
    """construct_horseshoe returning (result, error) instead of raising."""
    try:
        return construct_horseshoe(*args, **kwargs), None
    except HypShadowError as exc:
        return None, exc
