"""Model Riemannian manifolds: round sphere, ellipsoid, flat torus, and a
conformally perturbed sphere (the `revolution_surface` config kind).

Each model works in explicit coordinate charts: the flat torus uses its
fundamental domain, the sphere-like models a pair of stereographic caps.
Chart transitions are internal; callers only ever see `Point` values that
carry their chart id.  All heavy numerics live in `_kernels`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as k
from .errors import ConfigError, NoConvergence, PointsTooFar, StepTooCoarse

# Stereographic chart domain: |u| < 3 keeps a wide overlap band around the
# equator (preferred charts stay inside |u| <= 1).
CHART_DOMAIN_RADIUS = 3.0

# Fixed traceless quadratic form defining the perturbation of the round
# sphere; generic enough to leave no continuous symmetry.
PERT_Q = np.array([
    [0.35, 0.30, 0.20],
    [0.30, -0.10, 0.25],
    [0.20, 0.25, -0.25],
])

KIND_NAMES = {
    k.KIND_TORUS: "flat_torus",
    k.KIND_SPHERE: "sphere",
    k.KIND_ELLIPSOID: "ellipsoid",
    k.KIND_PERT_SPHERE: "revolution_surface",
}


@dataclass(frozen=True)
class Point:
    """A manifold point: chart id plus chart coordinates."""
    chart: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.coords):
            raise ConfigError("point coordinates must be finite")


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector: base point plus chart components."""
    base: Point
    components: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.components):
            raise ConfigError("tangent components must be finite")


@dataclass(frozen=True)
class ManifoldModel:
    """Immutable metric model; safely shareable across workers.

    Attributes
    ----------
    kind : str
        One of sphere | ellipsoid | flat_torus | revolution_surface.
    n : int
        Intrinsic dimension (>= 2).
    params : tuple of float
        Flat parameter vector consumed by the kernels.
    rho : float
        Conservative injectivity-radius bound; every chord of a discrete
        loop must stay below it.
    """
    kind: str
    code: int
    n: int
    params: tuple[float, ...]
    rho: float
    model_hash: str = field(default="")

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("dimension must be >= 2")
        if self.rho <= 0:
            raise ConfigError("rho must be positive")
        if not self.model_hash:
            digest = hashlib.sha256(
                f"{self.kind}|{self.n}|{tuple(float(p) for p in self.params)!r}".encode()
            ).hexdigest()[:16]
            object.__setattr__(self, "model_hash", digest)

    # -- low-level representation helpers ------------------------------------

    @property
    def params_array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=np.float64)

    @property
    def ambient_dim(self) -> int:
        return self.n if self.code == k.KIND_TORUS else self.n + 1

    def ambient(self, p: Point) -> np.ndarray:
        self._check_point(p)
        U = np.asarray([p.coords], dtype=np.float64)
        charts = np.asarray([p.chart], dtype=np.int64)
        return k.chart_point_batch(self.code, self.params_array, charts, U)[0]

    def ambient_batch(self, charts: np.ndarray, U: np.ndarray) -> np.ndarray:
        return k.chart_point_batch(self.code, self.params_array, charts, U)

    def from_ambient(self, x: np.ndarray) -> Point:
        X = np.asarray([x], dtype=np.float64)
        chart = int(k.chart_pref_batch(self.code, self.params_array, X)[0])
        charts = np.asarray([chart], dtype=np.int64)
        u = k.chart_coords_batch(self.code, self.params_array, X, charts)[0]
        return Point(chart, tuple(float(c) for c in u))

    def from_ambient_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        charts = k.chart_pref_batch(self.code, self.params_array, X)
        U = k.chart_coords_batch(self.code, self.params_array, X, charts)
        return charts, U

    def _check_point(self, p: Point):
        if len(p.coords) != self.n:
            raise ConfigError(f"point has {len(p.coords)} coords, model needs {self.n}")
        if self.code != k.KIND_TORUS:
            if p.chart not in (0, 1):
                raise ConfigError("chart id must be 0 or 1")
            if math.hypot(*p.coords) > CHART_DOMAIN_RADIUS:
                raise ConfigError("coordinates outside the declared chart domain")
        elif p.chart != 0:
            raise ConfigError("the torus has a single chart 0")

    # -- metric operations ----------------------------------------------------

    def local_distance(self, x: Point, y: Point) -> float:
        """Riemannian distance between nearby points.

        Raises PointsTooFar when the pair violates the rho bound (checked
        first by a coarse chart-distance bound, then on the solved value).
        """
        X = np.asarray([self.ambient(x)])
        Y = np.asarray([self.ambient(y)])
        guess = k.log_guess_batch(self.code, self.params_array, X, Y)
        coarse = float(k.speed_batch(self.code, self.params_array, X, guess)[0])
        exact_guess = self.code in (k.KIND_TORUS, k.KIND_SPHERE)
        if coarse > self.rho * (1.0 + 1e-12 if exact_guess else 1.35):
            raise PointsTooFar(
                f"coarse distance {coarse:.6g} exceeds rho = {self.rho:.6g}")
        d, res = k.dist_batch(self.code, self.params_array, X, Y, guess,
                              k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
        if float(res[0]) > 1e-9:
            raise NoConvergence(f"shooting residual {float(res[0]):.3g}")
        d0 = float(d[0])
        if d0 > self.rho * (1.0 + 1e-9):
            raise PointsTooFar(f"distance {d0:.6g} exceeds rho = {self.rho:.6g}")
        return d0

    def log(self, x: Point, y: Point) -> np.ndarray:
        """Ambient initial velocity of the unit-time geodesic x -> y."""
        X = np.asarray([self.ambient(x)])
        Y = np.asarray([self.ambient(y)])
        guess = k.log_guess_batch(self.code, self.params_array, X, Y)
        V, res = k.log_batch(self.code, self.params_array, X, Y, guess,
                             k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
        if float(res[0]) > 1e-9:
            raise NoConvergence(f"shooting residual {float(res[0]):.3g}")
        return V[0]

    def short_geodesic(self, x: Point, y: Point, kparts: int) -> list[Point]:
        """The kparts-1 interior points of the minimizing geodesic x -> y,
        sampled at uniform parameter values (endpoints excluded)."""
        if kparts < 1:
            raise ConfigError("k must be >= 1")
        if x == y:
            return [x] * (kparts - 1)
        self.local_distance(x, y)  # enforces the rho precondition
        X = np.asarray([self.ambient(x)])
        Y = np.asarray([self.ambient(y)])
        guess = k.log_guess_batch(self.code, self.params_array, X, Y)
        V, res = k.log_batch(self.code, self.params_array, X, Y, guess,
                             k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
        if float(res[0]) > 1e-9:
            raise NoConvergence(f"shooting residual {float(res[0]):.3g}")
        B = kparts - 1
        if B == 0:
            return []
        Xr = np.repeat(X, B, axis=0)
        Vr = np.repeat(V, B, axis=0)
        frac = np.arange(1, kparts, dtype=np.float64) / kparts
        Z = k.segment_point_batch(self.code, self.params_array, Xr, Y, Vr, frac,
                                  k.SHOOT_STEPS)
        charts, U = self.from_ambient_batch(Z)
        return [Point(int(c), tuple(float(v) for v in u)) for c, u in zip(charts, U)]

    def geodesic_flow(self, v: TangentVector, t: float, steps: int) -> TangentVector:
        """Integrate the geodesic ODE for time t with a fixed-step RK4 scheme.

        Metric speed must be conserved to 1e-9 relative per unit time, else
        StepTooCoarse is raised.
        """
        if steps < 16:
            raise ConfigError("steps must be >= 16")
        p = v.base
        self._check_point(p)
        U = np.asarray([p.coords], dtype=np.float64)
        charts = np.asarray([p.chart], dtype=np.int64)
        J = k.chart_jac_batch(self.code, self.params_array, charts, U)[0]
        vamb = J @ np.asarray(v.components, dtype=np.float64)
        X = np.asarray([self.ambient(p)])
        V = np.asarray([vamb])
        s0 = float(k.speed_batch(self.code, self.params_array, X, V)[0])
        if s0 <= 0.0:
            raise ConfigError("tangent vector must be nonzero")
        Xf, Vf = k.flow_batch(self.code, self.params_array, X, V,
                              np.asarray([float(t)]), steps)
        s1 = float(k.speed_batch(self.code, self.params_array, Xf, Vf)[0])
        drift = abs(s1 - s0) / s0
        if drift > 1e-9 * max(1.0, abs(t)):
            raise StepTooCoarse(
                f"speed drift {drift:.3g} over t = {t}; increase steps")
        q = self.from_ambient(Xf[0])
        charts2 = np.asarray([q.chart], dtype=np.int64)
        U2 = np.asarray([q.coords], dtype=np.float64)
        J2 = k.chart_jac_batch(self.code, self.params_array, charts2, U2)[0]
        comps, *_ = np.linalg.lstsq(J2, Vf[0], rcond=None)
        return TangentVector(q, tuple(float(c) for c in comps))

    def curvature(self, p: Point) -> float:
        """Gaussian curvature at p (n = 2 models)."""
        if self.n != 2:
            raise ConfigError("Gaussian curvature only available for n = 2")
        X = np.asarray([self.ambient(p)])
        return float(k.gauss_curv_batch(self.code, self.params_array, X)[0])


# -- constructors --------------------------------------------------------------

def sphere(radius: float = 1.0, n: int = 2) -> ManifoldModel:
    """Round sphere S^n of the given radius (numerics for n <= 3)."""
    if radius <= 0:
        raise ConfigError("radius must be positive")
    if n > 3:
        raise ConfigError("numerical sphere models support n <= 3")
    # injectivity radius is pi*R; stay at half of it
    return ManifoldModel("sphere", k.KIND_SPHERE, n, (float(radius),),
                         math.pi * radius / 2.0)


def ellipsoid(a: float, b: float, c: float) -> ManifoldModel:
    """Triaxial ellipsoid surface with semi-axes (a, b, c)."""
    if min(a, b, c) <= 0:
        raise ConfigError("semi-axes must be positive")
    lo, mid, hi = sorted((a, b, c))
    # conjugate-point bound: K_max = hi^2/(lo*mid)^2, first conjugate arc
    # >= pi*lo*mid/hi; half of it is a safe rho
    rho = 0.5 * math.pi * lo * mid / hi
    return ManifoldModel("ellipsoid", k.KIND_ELLIPSOID, 2,
                         (float(a), float(b), float(c)), rho)


def flat_torus(periods=(1.0, 1.0)) -> ManifoldModel:
    """Flat torus R^n / (period lattice), rectangular lattice."""
    per = tuple(float(p) for p in periods)
    if len(per) < 2 or min(per) <= 0:
        raise ConfigError("need >= 2 positive periods")
    # injectivity radius of the rectangular torus is half the shortest period
    return ManifoldModel("flat_torus", k.KIND_TORUS, len(per), per, min(per) / 2.0)


def perturbed_sphere(eps: float, radius: float = 1.0) -> ManifoldModel:
    """Round sphere with conformal factor exp(eps*f), f a fixed traceless
    quadratic harmonic; eps = 0 reduces to the round metric."""
    if radius <= 0:
        raise ConfigError("radius must be positive")
    if abs(eps) > 0.5:
        raise ConfigError("perturbation eps too large for the rho bound")
    q = PERT_Q
    params = (float(radius), float(eps),
              q[0, 0], q[0, 1], q[0, 2], q[1, 1], q[1, 2], q[2, 2])
    fb = float(np.max(np.abs(np.linalg.eigvalsh(q))))
    rho = (math.pi * radius / 2.0) * math.exp(-abs(eps) * fb) / math.sqrt(
        1.0 + 3.0 * abs(eps) * fb)
    return ManifoldModel("revolution_surface", k.KIND_PERT_SPHERE, 2, params, rho)


# -- config files ---------------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def model_from_config(cfg: dict[str, str]) -> ManifoldModel:
    """Build a model from parsed config keys (see README for the key list)."""
    try:
        kind = cfg["kind"]
    except KeyError:
        raise ConfigError("missing key: kind") from None
    if kind == "sphere":
        n = int(cfg.get("dim", "2"))
        return sphere(float(cfg.get("radius", "1.0")), n)
    if kind == "ellipsoid":
        axes = [float(v) for v in cfg.get("axes", "1,1.1,1.3").split(",")]
        if len(axes) != 3:
            raise ConfigError("key axes: need three comma-separated semi-axes")
        return ellipsoid(*axes)
    if kind == "flat_torus":
        periods = [float(v) for v in cfg.get("periods", "1,1").split(",")]
        return flat_torus(periods)
    if kind in ("revolution_surface", "perturbed_sphere"):
        return perturbed_sphere(float(cfg.get("perturbation_eps", "0.05")),
                                float(cfg.get("radius", "1.0")))
    raise ConfigError(f"key kind: unknown model kind {kind!r}")
