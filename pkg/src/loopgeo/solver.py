"""Closed-geodesic solver on the broken-geodesic space.

Critical points of the discrete energy E(x) = N * sum |x_i - x_{i-1}|^2 are
closed geodesics; they are located by monotone gradient descent followed by
a pseudo-inverse Newton phase, both running on per-vertex chart coordinates.
Morse indices and nullities come from eigenvalue counts of the discrete
Hessian; Poincare maps from Jacobi-equation integration along the orbit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as k
from .errors import (
    CollapsedToConstant,
    ConfigError,
    IntegrationFailure,
    NoConvergence,
    ParseError,
    SpectralGapTooSmall,
)
from .loops import DiscreteLoop, iterate, metrics, rotate
from .models import ManifoldModel

GRAD_TOL = 1e-9          # convergence target on |grad E|
COLLAPSE_F = 1e-6        # below this F the loop has contracted to a point
EPS_CUT_REL = 1e-6       # eigenvalue classification cutoff, relative
GAP_FACTOR = 10.0        # required relative gap around the cutoff
FD_STEP = 1e-5           # Hessian finite-difference step (chart coords)


@dataclass
class ConvergenceReport:
    grad_norm: float
    gd_iterations: int
    newton_iterations: int


@dataclass
class CriticalOrbit:
    """A found closed geodesic with its iteration data."""
    model: ManifoldModel
    loop: DiscreteLoop
    length: float
    prime: bool
    report: ConvergenceReport
    records: dict[int, tuple[int, int]] = field(default_factory=dict)
    poincare: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.model.n


def _energy_grad(model, charts, coords, Vf, Vb):
    E, G, Vf, Vb, resid = k.loop_energy_grad(
        model.code, model.params_array, charts, coords, Vf, Vb,
        k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
    if resid > 1e-9:
        raise NoConvergence("edge shooting diverged during descent")
    return float(E), G, Vf, Vb


def _rechart(model, charts, coords):
    """Move vertices to their preferred chart when they drift outward."""
    if model.code == k.KIND_TORUS:
        U = k.chart_coords_batch(model.code, model.params_array, coords, charts)
        return charts, U
    if float(np.max(np.sum(coords * coords, axis=1))) <= 1.44:
        return charts, coords
    X = model.ambient_batch(charts, coords)
    return model.from_ambient_batch(X)


def find_critical(model: ManifoldModel, seed: DiscreteLoop,
                  tol: float = GRAD_TOL, max_newton: int = 80) -> CriticalOrbit:
    """Flow a seed loop to a critical point of the discrete energy.

    Closed geodesics are saddles in general, so the driver is a damped
    Newton iteration on grad E = 0 with a spectral pseudo-inverse (the
    rotation zero-mode is dropped); when a Newton step fails its line
    search, one descent step on |grad E|^2 is taken instead.

    The seed must satisfy the chord bound and F(seed) <= sqrt(N) * rho.
    Raises CollapsedToConstant when the iteration contracts the loop, and
    NoConvergence when the budget runs out.
    """
    N = seed.N
    m0 = metrics(seed)
    if m0.root_energy > np.sqrt(N) * model.rho * (1 + 1e-12):
        raise ConfigError(
            f"F(seed) = {m0.root_energy:.6g} exceeds sqrt(N)*rho "
            f"= {np.sqrt(N) * model.rho:.6g}")
    charts = seed.charts[:-1].copy()
    coords = seed.coords[:-1].copy()
    amb = model.ambient_dim
    Vf = np.zeros((N, amb))
    Vb = np.zeros((N, amb))
    E, G, Vf, Vb = _energy_grad(model, charts, coords, Vf, Vb)

    newton_iters = 0
    fallback_iters = 0
    for it in range(max_newton):
        gnorm = float(np.linalg.norm(G))
        if gnorm < tol:
            break
        H = k.loop_hessian(model.code, model.params_array, charts, coords,
                           k.SHOOT_STEPS, FD_STEP, k.SHOOT_MAXIT, k.SHOOT_TOL)
        w, V = np.linalg.eigh(H)
        wmax = float(np.max(np.abs(w)))
        g = G.reshape(-1)
        coef = V.T @ g
        keep = np.abs(w) > 1e-8 * wmax
        delta = -(V[:, keep] @ (coef[keep] / w[keep])).reshape(coords.shape)
        # trust cap keeps early steps inside the chart overlap band
        dmax = float(np.max(np.abs(delta)))
        if dmax > 0.3:
            delta *= 0.3 / dmax
        lam = 1.0
        improved = False
        for _ in range(30):
            trial = coords + lam * delta
            try:
                Et, Gt, Vft, Vbt = _energy_grad(model, charts, trial, Vf, Vb)
            except NoConvergence:
                lam *= 0.5
                continue
            if float(np.linalg.norm(Gt)) < gnorm:
                coords, E, G, Vf, Vb = trial, Et, Gt, Vft, Vbt
                improved = True
                break
            lam *= 0.5
        newton_iters = it + 1
        if not improved:
            # steepest descent on |grad E|^2: direction -H g
            dd = -(H @ g).reshape(coords.shape)
            dn = float(np.linalg.norm(dd))
            if dn == 0.0:
                break
            step = min(gnorm / dn, 0.1 / max(float(np.max(np.abs(dd))), 1e-30))
            ok = False
            for _ in range(30):
                trial = coords + step * dd
                try:
                    Et, Gt, Vft, Vbt = _energy_grad(model, charts, trial, Vf, Vb)
                except NoConvergence:
                    step *= 0.5
                    continue
                if float(np.linalg.norm(Gt)) < gnorm:
                    coords, E, G, Vf, Vb = trial, Et, Gt, Vft, Vbt
                    ok = True
                    break
                step *= 0.5
            fallback_iters += 1
            if not ok:
                break
        charts, coords = _rechart(model, charts, coords)
        if float(np.sqrt(E)) < COLLAPSE_F:
            raise CollapsedToConstant("iteration contracted the loop")

    gnorm = float(np.linalg.norm(G))
    if gnorm > tol:
        raise NoConvergence(f"gradient norm {gnorm:.3g} above {tol:.3g}")
    gd_iters = fallback_iters

    loop = DiscreteLoop(model, np.append(charts, charts[0]),
                        np.vstack([coords, coords[:1]]))
    mm = metrics(loop)
    if mm.length / mm.root_energy < 1.0 - 1e-8:
        raise NoConvergence("converged point is not PPAL; not a geodesic")

    loop = _gauge_fix(loop)
    prime = _is_prime(loop)
    return CriticalOrbit(model, loop, mm.length, prime,
                         ConvergenceReport(gnorm, gd_iters, newton_iters))


def _gauge_fix(loop: DiscreteLoop) -> DiscreteLoop:
    """Rotate vertex labels so x_0 is the lexicographically smallest vertex
    (first chart coordinate, then second, then chart id)."""
    rows = [tuple(loop.coords[i]) + (int(loop.charts[i]),) for i in range(loop.N)]
    start = min(range(loop.N), key=lambda i: rows[i])
    return rotate(loop, start)


def _is_prime(loop: DiscreteLoop, rtol: float = 1e-6) -> bool:
    """A loop is non-prime when some nontrivial vertex rotation maps it to
    itself (it is then an iterate of a shorter orbit)."""
    X = loop.ambient_vertices()
    N = loop.N
    scale = max(float(np.max(np.abs(X))), 1e-30)
    for d in range(1, N):
        if N % d:
            continue
        if d == N:
            break
        shifted = np.vstack([X[d:], X[:d]])
        if float(np.max(np.abs(shifted - X))) < rtol * scale:
            return False
    return True


# -- Morse index / nullity -------------------------------------------------------

def _classify_spectrum(w: np.ndarray, n: int) -> tuple[int, int]:
    wmax = float(np.max(np.abs(w)))
    if wmax == 0.0:
        raise SpectralGapTooSmall("zero Hessian")
    eps_cut = EPS_CUT_REL * wmax
    aw = np.abs(w)
    small = aw <= eps_cut
    kdim = int(np.sum(small))
    if kdim == 0:
        raise SpectralGapTooSmall("no rotation zero-mode found")
    s_max = float(np.max(aw[small]))
    large = aw[~small]
    l_min = float(np.min(large)) if large.size else np.inf
    if l_min < GAP_FACTOR * max(s_max, eps_cut / 1e3):
        raise SpectralGapTooSmall(
            f"eigenvalues {s_max:.3g} and {l_min:.3g} straddle the cutoff "
            f"{eps_cut:.3g} without a 10x gap")
    lam = int(np.sum(w < -eps_cut))
    nu = kdim - 1
    if nu > 2 * (n - 1):
        raise SpectralGapTooSmall(f"nullity {nu} exceeds 2(n-1)")
    return lam, nu


def hessian_index(orbit: CriticalOrbit, m: int) -> tuple[int, int]:
    """Morse index and nullity of the m-fold iterate, from the discrete
    Hessian spectrum (the S^1 rotation direction is discounted)."""
    if m in orbit.records:
        return orbit.records[m]
    loop = iterate(orbit.loop, m)
    c = loop.chords()
    if float(np.max(c)) > orbit.model.rho:
        raise ConfigError("iterate violates the chord bound; refine N")
    H = k.loop_hessian(orbit.model.code, orbit.model.params_array,
                       loop.charts[:-1], loop.coords[:-1],
                       k.SHOOT_STEPS, FD_STEP, k.SHOOT_MAXIT, k.SHOOT_TOL)
    w = np.linalg.eigvalsh(H)
    lam_nu = _classify_spectrum(w, orbit.model.n)
    orbit.records[m] = lam_nu
    return lam_nu


def index_table(orbit: CriticalOrbit, M: int) -> tuple[list[int], list[int]]:
    lams, nus = [], []
    for m in range(1, M + 1):
        lam, nu = hessian_index(orbit, m)
        lams.append(lam)
        nus.append(nu)
    return lams, nus


# -- Poincare map ----------------------------------------------------------------

def poincare_map(orbit: CriticalOrbit, steps_per_unit: int = 600) -> np.ndarray:
    """Linearized return map of the geodesic flow around the orbit.

    n = 2: integrates the normal Jacobi equation y'' + K(s) y = 0 in
    arclength over one period.  Round spheres use the closed form (identity).
    Symplecticity (det = 1) is enforced to 1e-7.
    """
    if orbit.poincare is not None:
        return orbit.poincare
    model = orbit.model
    if model.kind == "sphere":
        P = np.eye(2 * (model.n - 1))
        orbit.poincare = P
        return P
    if model.n != 2:
        raise ConfigError("Poincare maps need n = 2 or a round sphere")
    X = orbit.loop.ambient_vertices()
    code, params = model.code, model.params_array
    nxt = np.vstack([X[1:], X[:1]])
    prv = np.vstack([X[-1:], X[:-1]])
    guess_f = k.log_guess_batch(code, params, X, nxt)
    Vf, _ = k.log_batch(code, params, X, nxt, guess_f,
                        k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
    guess_b = k.log_guess_batch(code, params, X, prv)
    Vb, _ = k.log_batch(code, params, X, prv, guess_b,
                        k.SHOOT_STEPS, k.SHOOT_MAXIT, k.SHOOT_TOL)
    # central-difference tangent at vertex 0 kills the chord curvature bias
    v0 = 0.5 * (Vf[0] - Vb[0])
    sp = float(k.speed_batch(code, params, X[:1], v0.reshape(1, -1))[0])
    v0 = v0 / sp
    # chord -> arc correction per segment: s = c + c^3 K / 24 + O(c^5)
    c = k.speed_batch(code, params, X, Vf)
    mid = k.segment_point_batch(code, params, X, nxt, Vf,
                                np.full(X.shape[0], 0.5), k.SHOOT_STEPS)
    Kmid = k.gauss_curv_batch(code, params, mid)
    ell = float(np.sum(c + c ** 3 * Kmid / 24.0))
    steps = max(1024, int(steps_per_unit * ell))
    P, drift = k.jacobi_poincare(code, params, X[0], v0, ell, steps)
    det = float(np.linalg.det(P))
    if abs(det - 1.0) > 1e-7 or drift > 1e-7:
        raise IntegrationFailure(
            f"Poincare map not symplectic: det = {det!r}, speed drift {drift:.3g}")
    orbit.poincare = P
    return P


# -- orbit records ---------------------------------------------------------------

def _fmt(x: float) -> float:
    # 12 significant digits, the CLI-wide float format
    return float(f"{x:.12g}")


def orbit_record(orbit: CriticalOrbit) -> dict:
    rec = {
        "model": orbit.model.model_hash,
        "kind": orbit.model.kind,
        "N": orbit.loop.N,
        "length": _fmt(orbit.length),
        "prime": orbit.prime,
        "grad_norm": _fmt(orbit.report.grad_norm),
        "iterations": orbit.report.gd_iterations + orbit.report.newton_iterations,
        "lambda_nu": [[m, ln[0], ln[1]] for m, ln in sorted(orbit.records.items())],
        "basepoint": [int(orbit.loop.charts[0])]
        + [_fmt(v) for v in orbit.loop.coords[0]],
        "flags": orbit.flags,
    }
    if orbit.poincare is not None:
        rec["P"] = [[_fmt(v) for v in row] for row in orbit.poincare]
    return rec


def dump_orbits(orbits: list[CriticalOrbit]) -> str:
    """Append-only database: one JSON object per line, deterministically
    sorted by (length, lambda_1, basepoint)."""
    def key(o):
        lam1 = o.records.get(1, (0, 0))[0]
        return (o.length, lam1, tuple(o.loop.coords[0]))
    return "".join(json.dumps(orbit_record(o), sort_keys=True) + "\n"
                   for o in sorted(orbits, key=key))


def load_orbit_records(path: str) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad orbit record: {exc}") from None
    return out
