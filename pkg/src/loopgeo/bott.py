"""Index iteration machinery: the omega-index function on the unit circle,
splitting numbers, the iterate-index sum formula, growth bounds, and the
based-loop index relations.

The omega-index is piecewise constant on the circle, symmetric under
conjugation, with jumps only at eigenvalues of the linearized return map P;
summing it over m-th roots of unity recovers the Morse index of the m-fold
iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    EigenvalueOnGridAmbiguous,
    GrowthFlagInconsistent,
    InconsistentSystem,
    ParabolicAtMinusOne,
    SequenceTooShort,
)

ANGLE_MERGE = 1e-6     # jump angles closer than this are one eigenvalue
ANGLE_MATCH = 1e-9     # root-of-unity vs jump-angle coincidence tolerance
KREIN_TOL = 1e-8       # minimum |Krein form| before declaring a sign
TRACE_TOL = 1e-8       # |trace -+ 2| threshold for the parabolic boundary


@dataclass(frozen=True)
class OmegaIndex:
    """Piecewise-constant integer function on the upper half circle.

    jump_angles are sorted in [0, pi]; point_values[i] is the value at the
    jump, arc_values[j] the value on the j-th open arc between consecutive
    jumps (including the arcs bordering 0 and pi when those are not jumps).
    nullities[i] = dim ker(P - e^{i angle} I) per single root, used for the
    index-plus-nullity variant.
    """
    n: int
    jump_angles: tuple[float, ...]
    point_values: tuple[int, ...]
    arc_values: tuple[int, ...]
    nullities: tuple[int, ...]

    def __post_init__(self):
        angles = self.jump_angles
        if list(angles) != sorted(angles):
            raise ValueError("jump angles must be sorted")
        if len(self.arc_values) != len(angles) + 1:
            raise ValueError("need one arc value per gap (k angles -> k+1 arcs)")
        values = list(self.point_values) + list(self.arc_values)
        if values and (max(values) - min(values)) > self.n - 1:
            raise ValueError("omega-index spread exceeds n - 1")
        for i, a in enumerate(angles):
            left = self.arc_values[i]
            right = self.arc_values[i + 1]
            for s in (left - self.point_values[i], right - self.point_values[i]):
                if not 0 <= s <= self.n - 1:
                    raise ValueError("splitting numbers must lie in 0..n-1")

    def value_at(self, angle: float) -> int:
        """Omega at e^{i*angle}; conjugation symmetry folds into [0, pi]."""
        a = math.fmod(abs(angle), 2.0 * math.pi)
        if a > math.pi:
            a = 2.0 * math.pi - a
        for i, ja in enumerate(self.jump_angles):
            if abs(a - ja) <= ANGLE_MATCH:
                return self.point_values[i]
        arc = 0
        for ja in self.jump_angles:
            if a > ja:
                arc += 1
        return self.arc_values[arc]

    def nullity_at(self, angle: float) -> int:
        a = math.fmod(abs(angle), 2.0 * math.pi)
        if a > math.pi:
            a = 2.0 * math.pi - a
        for i, ja in enumerate(self.jump_angles):
            if abs(a - ja) <= ANGLE_MATCH:
                return self.nullities[i]
        return 0

    def splitting_numbers(self, angle: float) -> tuple[int, int]:
        """(S+, S-): one-sided limits minus the point value at a jump."""
        for i, ja in enumerate(self.jump_angles):
            if abs(angle - ja) <= ANGLE_MATCH:
                return (self.arc_values[i + 1] - self.point_values[i],
                        self.arc_values[i] - self.point_values[i])
        return 0, 0

    def average_index(self) -> float | Fraction:
        """Circle average of the omega-index; exact when the only jumps sit
        at angles 0 or pi."""
        bounds = [0.0] + list(self.jump_angles) + [math.pi]
        if all(a <= ANGLE_MATCH or abs(a - math.pi) <= ANGLE_MATCH
               for a in self.jump_angles):
            interior = [v for a0, a1, v in zip(bounds, bounds[1:], self.arc_values)
                        if a1 - a0 > ANGLE_MATCH]
            return Fraction(interior[0]) if interior else Fraction(self.point_values[0])
        acc = 0.0
        for a0, a1, v in zip(bounds, bounds[1:], self.arc_values):
            acc += max(a1 - a0, 0.0) * v
        return acc / math.pi


def bott_sum(omega: OmegaIndex, m: int) -> int:
    """Index of the m-fold iterate: sum of omega over the m-th roots of unity."""
    return sum(omega.value_at(2.0 * math.pi * j / m) for j in range(m))


def nullity_sum(omega: OmegaIndex, m: int) -> int:
    """Nullity of the m-fold iterate from the stored kernel dimensions."""
    return sum(omega.nullity_at(2.0 * math.pi * j / m) for j in range(m))


def _shear_invariant(P: np.ndarray, eig: float) -> float:
    """Basis-independent shear coefficient c with P w = w + c e,
    normalized by omega(e, w) = 1; sign distinguishes the two parabolic
    conjugacy classes."""
    A = P - eig * np.eye(2)
    # eigenvector e of the double eigenvalue
    if abs(A[0, 0]) + abs(A[0, 1]) >= abs(A[1, 0]) + abs(A[1, 1]):
        row = A[0]
    else:
        row = A[1]
    e = np.array([-row[1], row[0]])
    e = e / np.linalg.norm(e)
    # w with omega(e, w) = e0*w1 - e1*w0 = 1
    w = np.array([-e[1], e[0]])
    # c = -omega(w, Pw); anchored so the flat shear [[1, l], [0, 1]] in
    # (value, derivative) coordinates has c = +l
    return float(np.dot(P @ w - eig * w, np.array([w[1], -w[0]])))


def omega_from_poincare(P: np.ndarray, lam1: int, n: int = 2) -> OmegaIndex:
    """Build the omega-index of an n = 2 orbit from its return map and
    first index, anchoring the value at 1 with the m = 1 sum formula.

    Raises ParabolicAtMinusOne for eigenvalue -1 of parabolic type (the
    jump data is not determined by the block constraints; such orbits are
    flagged and excluded from round-trip checks), and
    EigenvalueOnGridAmbiguous when |trace -+ 2| is below tolerance with an
    unresolved Jordan type.
    """
    if n != 2:
        raise ValueError("omega_from_poincare handles n = 2 return maps")
    P = np.asarray(P, dtype=np.float64)
    if P.shape != (2, 2):
        raise ValueError("need a 2x2 symplectic matrix")
    tr = float(np.trace(P))

    # a jump at the boundary angles 0 or pi leaves one arc slot empty; it is
    # filled with the adjacent arc value so both one-sided limits agree
    if abs(tr - 2.0) < TRACE_TOL:
        offdiag = float(np.max(np.abs(P - np.eye(2))))
        if offdiag < TRACE_TOL:
            # identity: both splitting numbers are 1, kernel dim 2
            return OmegaIndex(n, (0.0,), (lam1,), (lam1 + 1, lam1 + 1), (2,))
        c = _shear_invariant(P, 1.0)
        if abs(c) < TRACE_TOL:
            raise EigenvalueOnGridAmbiguous(
                f"trace = {tr!r} but the Jordan type is unresolved")
        if c > 0:
            # positive shear: no jump, one periodic normal field
            return OmegaIndex(n, (0.0,), (lam1,), (lam1, lam1), (1,))
        return OmegaIndex(n, (0.0,), (lam1,), (lam1 + 1, lam1 + 1), (1,))

    if abs(tr + 2.0) < TRACE_TOL:
        raise ParabolicAtMinusOne(
            "eigenvalue -1 of parabolic type: jump data not determined")

    if abs(tr) < 2.0:
        # elliptic: eigenvalues e^{+-i theta}, Krein sign of the upper one
        theta = math.acos(tr / 2.0)
        ev, vecs = np.linalg.eig(P)
        iu = int(np.argmax(ev.imag))
        v = vecs[:, iu]
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        s = float(np.real(1j * (np.conj(v) @ (J @ v))))
        if abs(s) < KREIN_TOL:
            raise EigenvalueOnGridAmbiguous("Krein form numerically zero")
        if s > 0:
            # S+ = 1, S- = 0: value lam1 up to theta, lam1 + 1 beyond
            return OmegaIndex(n, (theta,), (lam1,), (lam1, lam1 + 1), (1,))
        return OmegaIndex(n, (theta,), (lam1 - 1,), (lam1, lam1 - 1), (1,))

    # hyperbolic (either sign of trace): no eigenvalues on the circle
    return OmegaIndex(n, (), (), (lam1,), ())


def omega_from_iterates(lams: list[int], candidate_angles: list[float],
                        n: int = 2) -> OmegaIndex:
    """Invert the iterate-index sums: solve for a piecewise-constant
    omega-index with jumps only at the candidate angles.  The solution must
    be exactly integral, else InconsistentSystem is raised."""
    M = len(lams)
    angles = sorted(set(float(a) for a in candidate_angles))
    merged: list[float] = []
    for a in angles:
        if not merged or a - merged[-1] > ANGLE_MERGE:
            merged.append(a)
    k_unknowns = 2 * len(merged) + 1
    if M < len(merged) + 1:
        raise SequenceTooShort(
            f"{M} iterate indices cannot determine {k_unknowns} unknowns")

    def column(angle: float) -> np.ndarray:
        col = np.zeros(k_unknowns)
        for i, ja in enumerate(merged):
            if abs(angle - ja) <= ANGLE_MATCH:
                col[i] = 1.0
                return col
        arc = sum(1 for ja in merged if angle > ja)
        col[len(merged) + arc] = 1.0
        return col

    A = np.zeros((M, k_unknowns))
    for m in range(1, M + 1):
        for j in range(m):
            ang = 2.0 * math.pi * j / m
            if ang > math.pi:
                ang = 2.0 * math.pi - ang
            A[m - 1] += column(ang)
    b = np.asarray(lams, dtype=np.float64)
    sampled = np.sum(np.abs(A), axis=0) > 0
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    ints = np.rint(sol).astype(int)
    if (np.max(np.abs((sol - ints)[sampled]), initial=0.0) > 1e-6
            or np.max(np.abs(A @ ints - b)) > 1e-9):
        raise InconsistentSystem(
            "no integer omega-index reproduces the iterate indices")
    point_values = [int(v) for v in ints[: len(merged)]]
    arc_values = [int(v) for v in ints[len(merged):]]
    # boundary jumps leave an unsampled arc slot; mirror the adjacent value
    if merged and merged[0] <= ANGLE_MATCH:
        arc_values[0] = arc_values[1]
    if merged and abs(merged[-1] - math.pi) <= ANGLE_MATCH:
        arc_values[-1] = arc_values[-2]
    # a jump angle no root of unity hits leaves its point value undetermined
    # by the data; the splitting-number box then pins it (uniquely when the
    # adjacent arcs differ)
    for i in range(len(merged)):
        if not sampled[i]:
            lo = max(arc_values[i], arc_values[i + 1]) - (n - 1)
            hi = min(arc_values[i], arc_values[i + 1])
            if lo > hi:
                raise InconsistentSystem(
                    "no admissible point value at an unsampled jump angle")
            point_values[i] = hi
    return OmegaIndex(n, tuple(merged), tuple(point_values), tuple(arc_values),
                      tuple(0 for _ in merged))


def growth_bounds(lam1: int, n: int, m: int) -> tuple[int, int]:
    """Smallest and greatest m-th iterate index compatible with the
    iteration inequality: m*lam1 -+ (m-1)(n-1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lo = m * lam1 - (m - 1) * (n - 1)
    hi = m * lam1 + (m - 1) * (n - 1)
    return lo, hi


@dataclass
class IterationReport:
    """Evaluation of the iteration inequalities on a lambda/nu table."""
    n: int
    lams: list[int]
    nus: list[int]
    lam_av: float
    lam_av_error: float
    index_bound_ok: list[bool] = field(default_factory=list)       # per m
    index_nullity_bound_ok: list[bool] = field(default_factory=list)
    average_bound_ok: bool = True
    average_nullity_bound_ok: bool = True
    min_attained: list[bool] = field(default_factory=list)
    max_attained: list[bool] = field(default_factory=list)
    min_propagation_ok: bool = True
    max_propagation_ok: bool = True

    @property
    def all_ok(self) -> bool:
        return (all(self.index_bound_ok) and all(self.index_nullity_bound_ok)
                and self.average_bound_ok and self.average_nullity_bound_ok
                and self.min_propagation_ok and self.max_propagation_ok)


def check_iteration(lams: list[int], nus: list[int], n: int) -> IterationReport:
    """Evaluate the iteration inequalities and propagation rules.

    Violations are reported, not raised: a false flag falsifies upstream
    numerics.  The average index is estimated from the tail of the sequence
    (difference quotient over the last half, which cancels the bounded
    offset), with error bar 2(n-1)/M.
    """
    if not lams or len(lams) != len(nus):
        raise SequenceTooShort("need matching nonempty lambda and nu sequences")
    if any(nu > 2 * (n - 1) for nu in nus):
        raise ValueError("nullity exceeds 2(n-1)")
    M = len(lams)
    lam1, nu1 = lams[0], nus[0]
    half = max(M // 2, 1)
    if M == 1:
        lam_av = float(lams[0])
    else:
        lam_av = (lams[M - 1] - lams[half - 1]) / float(M - half)
    err = 2.0 * (n - 1) / M
    rep = IterationReport(n, list(lams), list(nus), lam_av, err)
    for m in range(1, M + 1):
        lam_m, nu_m = lams[m - 1], nus[m - 1]
        slack = (m - 1) * (n - 1)
        rep.index_bound_ok.append(abs(lam_m - m * lam1) <= slack)
        rep.index_nullity_bound_ok.append(
            abs((lam_m + nu_m) - m * (lam1 + nu1)) <= slack)
        lo, hi = growth_bounds(lam1, n, m)
        rep.min_attained.append(lam_m == lo)
        rep.max_attained.append(lam_m == hi)
    tol = err + 1e-12
    rep.average_bound_ok = abs(lam1 - lam_av) <= (n - 1) + tol
    rep.average_nullity_bound_ok = abs(lam1 + nu1 - lam_av) <= (n - 1) + tol
    # once strictly above the minimum (below the maximum), stay there
    seen_strict_min = False
    seen_strict_max = False
    for m in range(1, M + 1):
        if seen_strict_min and rep.min_attained[m - 1]:
            rep.min_propagation_ok = False
        if seen_strict_max and rep.max_attained[m - 1]:
            rep.max_propagation_ok = False
        if not rep.min_attained[m - 1]:
            seen_strict_min = True
        if not rep.max_attained[m - 1]:
            seen_strict_max = True
    return rep


def based_index(lam1: int, lam_n: int, n: int, growth: str) -> int:
    """First index of the orbit in the based loop space, from the n-th
    iterate growth type: maximal growth leaves the index unchanged,
    minimal growth lowers it by n - 1."""
    if n == 1:
        return lam1
    if growth == "max":
        if lam_n != n * lam1 + (n - 1) ** 2:
            raise GrowthFlagInconsistent(
                f"lam_n = {lam_n} is not the maximal-growth value")
        return lam1
    if growth == "min":
        if lam_n != n * lam1 - (n - 1) ** 2:
            raise GrowthFlagInconsistent(
                f"lam_n = {lam_n} is not the minimal-growth value")
        return lam1 - (n - 1)
    raise ValueError("growth must be 'max' or 'min'")
