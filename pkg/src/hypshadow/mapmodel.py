"""Smooth toral endomorphisms, torus arithmetic and finite inverse-limit windows.

Points on the d-torus are plain numpy arrays with coordinates in [0, 1).
Every routine accepts stacked points of shape (..., d).

The built-in maps are lifts of the form

    F(x) = A x + eps * sin(2 pi x) / (2 pi)      (componentwise sine)

with A an integer matrix.  F(x + m) = F(x) + A m for integer m, so F
descends to the torus with degree |det A| while eps is small enough that
DF stays nonsingular.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousBranch, ConfigError, NoPreimageRule, WindowMismatch

TWO_PI = 2.0 * np.pi
ORBIT_TOL = 1e-12


def wrap(x):
    """Reduce coordinates mod 1 into [0, 1)."""
    x = np.asarray(x, dtype=float)
    y = x - np.floor(x)
    # x slightly below an integer can round up to exactly 1.0
    return np.where(y >= 1.0, 0.0, y)


def torus_delta(a, b):
    """Nearest-image displacement a - b, each coordinate in [-1/2, 1/2]."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return diff - np.round(diff)


def torus_dist(a, b):
    return np.linalg.norm(torus_delta(a, b), axis=-1)


def parse_matrix(text: str) -> np.ndarray:
    """Parse ``"3 1; 1 1"`` into an integer matrix."""
    rows = [r.split() for r in text.replace(",", " ").split(";") if r.strip()]
    try:
        mat = np.array([[int(v) for v in r] for r in rows], dtype=np.int64)
    except ValueError as exc:
        raise ConfigError(f"matrix entries must be integers: {text!r}") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"matrix must be square: {text!r}")
    return mat


def integer_det(mat: np.ndarray) -> int:
    # Bareiss fraction-free elimination keeps everything in Python ints
    m = [[int(v) for v in row] for row in mat]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True, eq=False)
class MapModel:
    """Toral endomorphism ``x -> A x + eps sin(2 pi x)/(2 pi) mod 1``."""

    matrix: np.ndarray
    epsilon: float = 0.0
    name: str = ""
    _coset_shifts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.int64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ConfigError("matrix must be square")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "_coset_shifts", self._enumerate_cosets())

    @classmethod
    def linear(cls, matrix, name: str = "") -> "MapModel":
        return cls(np.asarray(matrix), 0.0, name)

    @classmethod
    def perturbed(cls, matrix, epsilon: float, name: str = "") -> "MapModel":
        return cls(np.asarray(matrix), epsilon, name)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def degree(self) -> int:
        return abs(integer_det(self.matrix))

    @property
    def holder(self) -> tuple[float, float]:
        """(alpha, Lipschitz constant of Df) in the Euclidean lift metric."""
        return 1.0, TWO_PI * abs(self.epsilon)

    @property
    def is_linear(self) -> bool:
        return self.epsilon == 0.0

    def lift(self, x):
        """Universal-cover lift F: R^d -> R^d (no reduction mod 1)."""
        x = np.asarray(x, dtype=float)
        y = x @ self.matrix.T.astype(float)
        if self.epsilon:
            y = y + self.epsilon * np.sin(TWO_PI * x) / TWO_PI
        return y

    def eval(self, p):
        return wrap(self.lift(p))

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        jac = np.broadcast_to(self.matrix.astype(float), p.shape + (p.shape[-1],)).copy()
        if self.epsilon:
            idx = np.arange(self.dimension)
            jac[..., idx, idx] += self.epsilon * np.cos(TWO_PI * p)
        return jac

    def iterate(self, p, n: int) -> np.ndarray:
        """Orbit ``[p, f(p), ..., f^n(p)]`` with shape (n + 1, ..., d)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        p = wrap(p)
        out = np.empty((n + 1,) + p.shape)
        out[0] = p
        for i in range(n):
            out[i + 1] = self.eval(out[i])
        return out

    def _enumerate_cosets(self) -> np.ndarray:
        """Integer vectors m in A[0,1)^d: one representative per class of Z^d / A Z^d."""
        mat = self.matrix.astype(float)
        if abs(np.linalg.det(mat)) < 0.5:
            return np.zeros((0, self.dimension), dtype=np.int64)
        corners = np.array(list(itertools.product([0, 1], repeat=self.dimension)), dtype=float)
        images = corners @ mat.T
        lo = np.floor(images.min(axis=0)).astype(int)
        hi = np.ceil(images.max(axis=0)).astype(int)
        grid = np.array(list(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])))
        pre = np.linalg.solve(mat, grid.T.astype(float)).T
        tol = 1e-9
        keep = np.all((pre >= -tol) & (pre < 1 - tol), axis=1)
        reps = grid[keep]
        if len(reps) != abs(round(np.linalg.det(mat))):
            raise NoPreimageRule("could not enumerate covering branches")
        return reps

    def preimages(self, p) -> list[np.ndarray]:
        """All q with f(q) = p, one per covering branch."""
        if len(self._coset_shifts) == 0:
            raise NoPreimageRule("singular linear part has no branch rule")
        p = wrap(p)
        mat = self.matrix.astype(float)
        out = []
        for m in self._coset_shifts:
            target = p + m
            q = np.linalg.solve(mat, target)
            if self.epsilon:
                for _ in range(50):
                    r = self.lift(q) - target
                    if np.max(np.abs(r)) < 1e-14:
                        break
                    q = q - np.linalg.solve(self.jacobian(q), r)
                else:
                    raise NoPreimageRule("Newton branch solve failed; epsilon too large?")
            out.append(wrap(q))
        return out


# -- inverse-limit windows ---------------------------------------------------


@dataclass
class OrbitWindow:
    """Finite truncation x_{-W..W} of a full orbit.

    ``history`` optionally stores older points (chronological) that
    ``extend_backward`` consumes under the "history" branch policy.
    """

    points: np.ndarray
    center_index: int = 0
    history: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] % 2 != 1:
            raise ValueError("window needs an odd number of points")

    @property
    def radius(self) -> int:
        return (self.points.shape[0] - 1) // 2

    @property
    def center(self) -> np.ndarray:
        return self.points[self.radius]

    def at(self, i: int) -> np.ndarray:
        """x_i for -W <= i <= W."""
        return self.points[i + self.radius]

    def residual(self, fmap: MapModel) -> float:
        if self.points.shape[0] < 2:
            return 0.0
        return float(np.max(torus_dist(fmap.eval(self.points[:-1]), self.points[1:])))

    def to_text(self) -> str:
        lines = []
        for i, x in enumerate(self.points):
            coords = " ".join(repr(float(c)) for c in x)
            lines.append(f"{i - self.radius} {coords}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, center_index: int = 0) -> "OrbitWindow":
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                parts = line.split()
                rows.append((int(parts[0]), [float(v) for v in parts[1:]]))
        rows.sort(key=lambda r: r[0])
        idx = [r[0] for r in rows]
        if idx != list(range(idx[0], idx[0] + len(idx))) or idx[0] != -idx[-1]:
            raise ValueError("window indices must run contiguously from -W to W")
        return cls(np.array([r[1] for r in rows]), center_index)


def window_from_orbit(orbit: np.ndarray, center: int, radius: int) -> OrbitWindow:
    """Slice a stored orbit; everything before the window becomes history."""
    lo, hi = center - radius, center + radius + 1
    if lo < 0 or hi > len(orbit):
        raise ValueError("window does not fit inside the stored orbit")
    return OrbitWindow(orbit[lo:hi].copy(), center, orbit[:lo].copy())


def nearest_preimage(fmap: MapModel, p, reference, tol: float = 1e-12) -> np.ndarray:
    pre = fmap.preimages(p)
    dists = np.array([torus_dist(q, reference) for q in pre])
    order = np.argsort(dists, kind="stable")
    if len(order) > 1 and dists[order[1]] - dists[order[0]] <= tol:
        raise AmbiguousBranch(f"two preimages equidistant from reference ({dists[order[0]]:.3g})")
    return pre[order[0]]


def backward_orbit(fmap: MapModel, p, steps: int, reference=None) -> np.ndarray:
    """Points [x_{-steps}, ..., x_{-1}] chosen by the nearest-branch policy.

    ``reference`` is a chronological array of at least ``steps`` points to
    follow (x_{-j} is matched against reference[-j]); without it each
    preimage is matched against the point it came from.
    """
    out = np.empty((steps, fmap.dimension))
    cur = wrap(p)
    for j in range(1, steps + 1):
        ref = cur if reference is None else reference[-j]
        cur = nearest_preimage(fmap, cur, ref)
        out[steps - j] = cur
    return out


def extend_backward(fmap: MapModel, w: OrbitWindow, steps: int, policy: str = "history") -> OrbitWindow:
    """Grow the window radius by ``steps``: new past points by branch policy,
    new future points by forward iteration."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return OrbitWindow(w.points.copy(), w.center_index, w.history)
    if policy == "history" and w.history is not None and len(w.history) >= steps:
        past = w.history[len(w.history) - steps:]
        history = w.history[: len(w.history) - steps]
    elif policy in ("history", "nearest-branch"):
        past = backward_orbit(fmap, w.points[0], steps)
        history = None
    else:
        raise ValueError(f"unknown branch policy {policy!r}")
    future = fmap.iterate(w.points[-1], steps)[1:]
    return OrbitWindow(np.vstack([past, w.points, future]), w.center_index, history)


def inverse_limit_distance(w1: OrbitWindow, w2: OrbitWindow) -> float:
    """Truncated sum over |i| <= W of d(x_i, y_i) / 2^|i|."""
    if w1.radius != w2.radius or w1.points.shape != w2.points.shape:
        raise WindowMismatch(f"radii differ: {w1.radius} vs {w2.radius}")
    idx = np.arange(-w1.radius, w1.radius + 1)
    return float(np.sum(torus_dist(w1.points, w2.points) / 2.0 ** np.abs(idx)))


BUILTIN_MAPS = {
    "cat": ("2 1; 1 1", 0.0),
    "det2": ("3 1; 1 1", 0.0),
    "det2-perturbed": ("3 1; 1 1", 0.05),
}


def builtin_map(name: str) -> MapModel:
    if name not in BUILTIN_MAPS:
        raise ConfigError(f"unknown built-in map {name!r}; choose from {sorted(BUILTIN_MAPS)}")
    mat, eps = BUILTIN_MAPS[name]
    return MapModel(parse_matrix(mat), eps, name)


def map_from_config(section) -> MapModel:
    """Build a map from a config mapping with keys ``matrix``, ``epsilon``
    and optionally ``dimension`` (checked against the matrix), or a
    ``builtin`` name."""
    if "builtin" in section:
        return builtin_map(section["builtin"])
    if "matrix" not in section:
        raise ConfigError("map section needs a 'matrix' key")
    mat = parse_matrix(section["matrix"])
    try:
        eps = float(section.get("epsilon", 0.0))
    except ValueError as exc:
        raise ConfigError("epsilon must be a real number") from exc
    if "dimension" in section and int(section["dimension"]) != mat.shape[0]:
        raise ConfigError("dimension does not match the matrix size")
    return MapModel(mat, eps, section.get("name", ""))
