"""Discrete closed loops: broken-geodesic polygons with N marked vertices.

A loop stores N+1 vertex rows with the last row an exact copy of the first.
Between consecutive vertices the loop is understood as the unique minimizing
geodesic segment, which is what every resampling operation samples.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .errors import (
    BasepointMismatch,
    ConfigError,
    NoConvergence,
    ParseError,
    PointsTooFar,
    ZeroLengthLoop,
)
from .models import ManifoldModel, Point

MIN_SEGMENTS = 8
PPAL_TOL = 1e-6          # flag threshold on L/F
VERTEX_COINCIDENCE = 1e-10


@dataclass(frozen=True)
class LoopMetrics:
    energy: float
    length: float
    root_energy: float
    is_ppal: bool


@dataclass(frozen=True)
class DiscreteLoop:
    """Closed polygon of N+1 points with x_0 = x_N (same stored value)."""
    model: ManifoldModel
    charts: np.ndarray   # (N+1,) int64
    coords: np.ndarray   # (N+1, n) float64

    def __post_init__(self):
        object.__setattr__(self, "charts", np.ascontiguousarray(self.charts, dtype=np.int64))
        object.__setattr__(self, "coords", np.ascontiguousarray(self.coords, dtype=np.float64))
        self.charts.setflags(write=False)
        self.coords.setflags(write=False)

    @property
    def N(self) -> int:
        return self.charts.shape[0] - 1

    @property
    def vertices(self) -> list[Point]:
        return [Point(int(c), tuple(float(v) for v in row))
                for c, row in zip(self.charts, self.coords)]

    @property
    def basepoint(self) -> Point:
        return Point(int(self.charts[0]), tuple(float(v) for v in self.coords[0]))

    def ambient_vertices(self) -> np.ndarray:
        """Ambient positions of vertices 0..N-1."""
        return self.model.ambient_batch(self.charts[:-1], self.coords[:-1])

    def chords(self) -> np.ndarray:
        """Riemannian lengths of the N geodesic segments."""
        return _edge_distances(self.model, self.ambient_vertices())


def _edge_distances(model: ManifoldModel, X: np.ndarray) -> np.ndarray:
    code, params = model.code, model.params_array
    Y = np.vstack([X[1:], X[:1]])
    guess = k.log_guess_batch(code, params, X, Y)
    d, res = k.dist_batch(code, params, X, Y, guess,
                          k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
    if float(np.max(res)) > 1e-9:
        raise NoConvergence("edge shooting did not converge")
    return d


def make_loop(model: ManifoldModel, charts, coords, validate: bool = True) -> DiscreteLoop:
    """Build a loop from N+1 vertex rows; validates closure and chord bound."""
    charts = np.asarray(charts, dtype=np.int64)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[0] != charts.shape[0]:
        raise ConfigError("need matching charts/coords rows")
    if charts.shape[0] < MIN_SEGMENTS + 1:
        raise ConfigError(f"a loop needs at least {MIN_SEGMENTS} segments")
    if charts[0] != charts[-1] or not np.array_equal(coords[0], coords[-1]):
        raise ConfigError("loop closure: x_N must equal x_0 exactly")
    loop = DiscreteLoop(model, charts, coords)
    if validate:
        c = loop.chords()
        worst = float(np.max(c)) if c.size else 0.0
        if worst > model.rho * (1.0 + 1e-9):
            raise PointsTooFar(
                f"chord {worst:.6g} exceeds rho = {model.rho:.6g}")
    return loop


def loop_from_ambient(model: ManifoldModel, X: np.ndarray,
                      validate: bool = True) -> DiscreteLoop:
    """Loop through the given N ambient positions (closure row appended)."""
    charts, U = model.from_ambient_batch(np.asarray(X, dtype=np.float64))
    charts = np.append(charts, charts[0])
    U = np.vstack([U, U[:1]])
    return make_loop(model, charts, U, validate=validate)


def loop_from_points(model: ManifoldModel, points: list[Point],
                     validate: bool = True) -> DiscreteLoop:
    charts = [p.chart for p in points]
    coords = [p.coords for p in points]
    return make_loop(model, charts, coords, validate=validate)


# -- functionals ----------------------------------------------------------------

def metrics(loop: DiscreteLoop) -> LoopMetrics:
    """Energy E = N * sum(chord^2), length L = sum(chord), F = sqrt(E)."""
    c = loop.chords()
    N = loop.N
    E = float(N * np.sum(c * c))
    L = float(np.sum(c))
    F = float(np.sqrt(E))
    is_ppal = True if F == 0.0 else (L / F) >= 1.0 - PPAL_TOL
    return LoopMetrics(E, L, F, is_ppal)


# -- resampling machinery --------------------------------------------------------

def _interp_at(loop: DiscreteLoop, seg: np.ndarray, frac: np.ndarray) -> np.ndarray:
    """Ambient points at (segment index, fraction) pairs along the loop."""
    code, params = loop.model.code, loop.model.params_array
    if seg.size == 0:
        return np.zeros((0, loop.model.ambient_dim))
    X = loop.model.ambient_batch(loop.charts[:-1], loop.coords[:-1])
    Xs = X[seg]
    Xe = X[(seg + 1) % loop.N]
    guess = k.log_guess_batch(code, params, Xs, Xe)
    V, res = k.log_batch(code, params, Xs, Xe, guess,
                         k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
    if float(np.max(res)) > 1e-9:
        raise NoConvergence("interpolation shooting did not converge")
    return k.segment_point_batch(code, params, Xs, Xe, V,
                                 np.asarray(frac, dtype=np.float64), k.SHOOT_STEPS)


def _resample_uniform(loop: DiscreteLoop, K: int) -> DiscreteLoop:
    """Resample to K segments at uniform arclength, keeping the basepoint."""
    c = loop.chords()
    L = float(np.sum(c))
    if L <= 0.0:
        raise ZeroLengthLoop("cannot resample a constant loop")
    cum = np.concatenate([[0.0], np.cumsum(c)])
    targets = np.arange(1, K, dtype=np.float64) * (L / K)
    seg = np.searchsorted(cum, targets, side="right") - 1
    seg = np.clip(seg, 0, loop.N - 1)
    safe = np.where(c[seg] > 0, c[seg], 1.0)
    frac = np.clip((targets - cum[seg]) / safe, 0.0, 1.0)
    interior = _interp_at(loop, seg, frac)
    ch_i, U_i = loop.model.from_ambient_batch(interior)
    charts = np.concatenate([[loop.charts[0]], ch_i, [loop.charts[0]]])
    coords = np.vstack([loop.coords[:1], U_i, loop.coords[:1]])
    return DiscreteLoop(loop.model, charts, coords)


def ppal_reparam(loop: DiscreteLoop) -> DiscreteLoop:
    """Reparametrize proportionally to arclength: uniform arclength resampling
    along the piecewise-geodesic interpolation, same image and basepoint."""
    return _resample_uniform(loop, loop.N)


def concat_min(a: DiscreteLoop, b: DiscreteLoop) -> tuple[float, DiscreteLoop]:
    """Concatenate composable loops at the energy-minimizing time
    s = F(a) / (F(a) + F(b)); the result traverses a on [0, s], b on [s, 1].

    Degenerate cases: both constant -> (0, b); one constant -> the other,
    reparametrized.
    """
    if a.model.model_hash != b.model.model_hash:
        raise BasepointMismatch("loops live on different models")
    base_a = a.model.ambient(a.basepoint)
    base_b = b.model.ambient(b.basepoint)
    if float(np.linalg.norm(base_a - base_b)) > VERTEX_COINCIDENCE:
        raise BasepointMismatch("loops do not share the basepoint vertex")
    Fa = metrics(a).root_energy
    Fb = metrics(b).root_energy
    N = max(a.N, b.N)
    if Fa <= 0.0 and Fb <= 0.0:
        return 0.0, b
    if Fa <= 0.0:
        return 0.0, _resample_uniform(b, N)
    if Fb <= 0.0:
        return 1.0, _resample_uniform(a, N)
    s = Fa / (Fa + Fb)
    ka = int(round(s * N))
    ka = min(max(ka, 1), N - 1)
    ra = _resample_uniform(a, ka)
    rb = _resample_uniform(b, N - ka)
    charts = np.concatenate([ra.charts[:-1], rb.charts[:-1], ra.charts[:1]])
    coords = np.vstack([ra.coords[:-1], rb.coords[:-1], ra.coords[:1]])
    return s, DiscreteLoop(a.model, charts, coords)


def _theta_half_to_s(t: np.ndarray, s: float) -> np.ndarray:
    # piecewise linear with theta(0)=0, theta(1/2)=s, theta(1)=1
    return np.where(t <= 0.5, 2.0 * s * t, s + (2.0 * t - 1.0) * (1.0 - s))


def _theta_s_to_half(t: np.ndarray, s: float) -> np.ndarray:
    # inverse of the above, defined for s in (0, 1)
    return np.where(t <= s, t / (2.0 * s), 0.5 + (t - s) / (2.0 * (1.0 - s)))


def _reparam_by(loop: DiscreteLoop, theta_vals: np.ndarray) -> DiscreteLoop:
    N = loop.N
    p = np.clip(theta_vals, 0.0, 1.0) * N
    seg = np.minimum(np.floor(p).astype(np.int64), N - 1)
    frac = p - seg
    interior = _interp_at(loop, seg, frac)
    ch_i, U_i = loop.model.from_ambient_batch(interior)
    charts = np.concatenate([[loop.charts[0]], ch_i, [loop.charts[0]]])
    coords = np.vstack([loop.coords[:1], U_i, loop.coords[:1]])
    return DiscreteLoop(loop.model, charts, coords)


def reparam_J(loop: DiscreteLoop, s: float) -> DiscreteLoop:
    """Precompose with the midpoint-moving reparametrization theta_{1/2 -> s}:
    for PPAL input of length L the output halves have lengths sL, (1-s)L."""
    if not 0.0 <= s <= 1.0:
        raise ConfigError("s must lie in [0, 1]")
    t = np.arange(1, loop.N, dtype=np.float64) / loop.N
    return _reparam_by(loop, _theta_half_to_s(t, s))


def reparam_J_inverse(loop: DiscreteLoop, s: float) -> DiscreteLoop:
    """Precompose with theta_{s -> 1/2}, inverting reparam_J(. , s) for
    s in (0, 1) up to resampling tolerance."""
    if not 0.0 < s < 1.0:
        raise ConfigError("the inverse needs s strictly inside (0, 1)")
    t = np.arange(1, loop.N, dtype=np.float64) / loop.N
    return _reparam_by(loop, _theta_s_to_half(t, s))


def rotate(loop: DiscreteLoop, kshift: int) -> DiscreteLoop:
    """Cyclic vertex shift by kshift (rotation by kshift/N); metrics invariant."""
    N = loop.N
    r = kshift % N
    if r == 0:
        return loop
    charts = np.concatenate([loop.charts[r:-1], loop.charts[:r], loop.charts[r:r + 1]])
    coords = np.vstack([loop.coords[r:-1], loop.coords[:r], loop.coords[r:r + 1]])
    return DiscreteLoop(loop.model, charts, coords)


def iterate(loop: DiscreteLoop, m: int) -> DiscreteLoop:
    """m-fold iterate: an m*N segment loop traversing the input m times."""
    if m < 1:
        raise ConfigError("m must be >= 1")
    if m == 1:
        return loop
    charts = np.concatenate([np.tile(loop.charts[:-1], m), loop.charts[:1]])
    coords = np.vstack([np.tile(loop.coords[:-1], (m, 1)), loop.coords[:1]])
    return DiscreteLoop(loop.model, charts, coords)


# -- loop files ------------------------------------------------------------------

def dump_loop(loop: DiscreteLoop) -> str:
    """Line-oriented record; floats use repr for bit-exact round-trips."""
    buf = io.StringIO()
    buf.write("# loopgeo loop v1\n")
    buf.write(f"model {loop.model.model_hash}\n")
    buf.write(f"N {loop.N}\n")
    for c, row in zip(loop.charts, loop.coords):
        buf.write(" ".join([str(int(c))] + [repr(float(v)) for v in row]) + "\n")
    return buf.getvalue()


def parse_loop(text: str, model: ManifoldModel) -> DiscreteLoop:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        tag, mhash = lines[0].split()
        assert tag == "model"
        tag, nstr = lines[1].split()
        assert tag == "N"
        N = int(nstr)
    except (ValueError, AssertionError, IndexError):
        raise ParseError("malformed loop header") from None
    if mhash != model.model_hash:
        raise ParseError(f"loop was written for model {mhash}, not {model.model_hash}")
    rows = lines[2:]
    if len(rows) != N + 1:
        raise ParseError(f"expected {N + 1} vertex rows, found {len(rows)}")
    charts, coords = [], []
    for row in rows:
        parts = row.split()
        charts.append(int(parts[0]))
        coords.append([float(v) for v in parts[1:]])
    return make_loop(model, charts, coords)


def save_loop(loop: DiscreteLoop, path: str):
    with open(path, "w") as fh:
        fh.write(dump_loop(loop))


def load_loop(path: str, model: ManifoldModel) -> DiscreteLoop:
    with open(path) as fh:
        return parse_loop(fh.read(), model)


# -- seed constructions ----------------------------------------------------------

def great_circle_loop(model: ManifoldModel, normal, N: int, phase: float = 0.0) -> DiscreteLoop:
    """Great circle (of the round representative) with the given unit normal;
    valid seed on the sphere and the perturbed sphere."""
    if model.kind not in ("sphere", "revolution_surface"):
        raise ConfigError("great circles need a sphere-like model")
    if model.n != 2:
        raise ConfigError("great_circle_loop is the n = 2 helper")
    nrm = np.asarray(normal, dtype=np.float64)
    nrm = nrm / np.linalg.norm(nrm)
    a = np.array([0.0, 0.0, 1.0]) if abs(nrm[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = a - np.dot(a, nrm) * nrm
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nrm, e1)
    R = model.params[0]
    th = 2.0 * np.pi * (np.arange(N) + phase) / N
    X = R * (np.outer(np.cos(th), e1) + np.outer(np.sin(th), e2))
    return loop_from_ambient(model, X)


def sphere_circle_loop(model: ManifoldModel, N: int) -> DiscreteLoop:
    """Equatorial great sphere-circle on S^n for n <= 3 (first two axes)."""
    if model.kind != "sphere":
        raise ConfigError("needs a round sphere")
    R = model.params[0]
    th = 2.0 * np.pi * np.arange(N) / N
    X = np.zeros((N, model.ambient_dim))
    X[:, 0] = R * np.cos(th)
    X[:, 1] = R * np.sin(th)
    return loop_from_ambient(model, X)


def principal_ellipse_loop(model: ManifoldModel, axis: int, N: int) -> DiscreteLoop:
    """Principal ellipse of the ellipsoid in the plane x_axis = 0."""
    if model.kind != "ellipsoid":
        raise ConfigError("needs an ellipsoid model")
    axes = np.asarray(model.params)
    i, j = [t for t in range(3) if t != axis]
    th = 2.0 * np.pi * np.arange(N) / N
    X = np.zeros((N, 3))
    X[:, i] = axes[i] * np.cos(th)
    X[:, j] = axes[j] * np.sin(th)
    return loop_from_ambient(model, X)


def torus_line_loop(model: ManifoldModel, klass, N: int, offset=None) -> DiscreteLoop:
    """Straight loop in the free homotopy class given by integer vector klass."""
    if model.kind != "flat_torus":
        raise ConfigError("needs a flat torus model")
    periods = np.asarray(model.params)
    w = np.asarray(klass, dtype=np.float64) * periods
    if offset is None:
        offset = np.zeros_like(periods)
    t = np.arange(N, dtype=np.float64) / N
    X = np.mod(offset + np.outer(t, w), periods)
    return loop_from_ambient(model, X)


def perturb_loop(loop: DiscreteLoop, amplitude: float, rng: np.random.Generator,
                 modes: int = 3) -> DiscreteLoop:
    """Add a smooth random chart-coordinate perturbation (low Fourier modes)."""
    N, n = loop.N, loop.coords.shape[1]
    j = np.arange(N)
    delta = np.zeros((N, n))
    for q in range(n):
        for m in range(1, modes + 1):
            amp = amplitude / m
            delta[:, q] += (rng.normal(0.0, amp) * np.cos(2 * np.pi * m * j / N)
                            + rng.normal(0.0, amp) * np.sin(2 * np.pi * m * j / N))
    coords = loop.coords.copy()
    coords[:-1] += delta
    coords[-1] = coords[0]
    return make_loop(loop.model, loop.charts.copy(), coords)
