"""Graded rings with structure constants and the level-(co)homology calculator.

The calculator works over models in which all geodesics are closed with one
prime length: level classes carry a degree, a filtration index r (level is
r times the prime length), and optionally a payload in the homology or
cohomology ring of the unit tangent sphere bundle SM.  Products follow the
loop-product degree laws (degree -n for homology, +(n-1) for cohomology)
and add filtration indices; payloads multiply in the SM ring.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    AxiomViolation,
    InsufficientSequence,
    NotAllGeodesicsClosed,
    ParseError,
    SequenceTooShort,
    VariantMismatch,
)


# -- graded rings ----------------------------------------------------------------

@dataclass(frozen=True)
class GradedRing:
    """Finite graded ring given by structure constants.

    Degrees obey deg(e_i e_j) = deg_i + deg_j + shift (shift = -dim for an
    intersection ring, 0 for a cup ring).  In integer mode the commutation
    sign is (-1)^((deg_i + sign_shift)(deg_j + sign_shift)).
    """
    name: str
    coeff: str                       # "z2" | "z"
    basis: tuple[str, ...]
    degrees: tuple[int, ...]
    shift: int
    sign_shift: int
    unit: str | None
    table: dict[tuple[int, int], tuple[tuple[int, int], ...]]

    def index(self, name: str) -> int:
        try:
            return self.basis.index(name)
        except ValueError:
            raise ParseError(f"{self.name}: unknown basis element {name!r}") from None

    def element(self, name: str) -> np.ndarray:
        v = np.zeros(len(self.basis), dtype=np.int64)
        v[self.index(name)] = 1
        return v

    def zero(self) -> np.ndarray:
        return np.zeros(len(self.basis), dtype=np.int64)

    def _reduce(self, v: np.ndarray) -> np.ndarray:
        return v % 2 if self.coeff == "z2" else v

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = self.zero()
        for i in np.nonzero(a)[0]:
            for j in np.nonzero(b)[0]:
                for kk, c in self.table.get((int(i), int(j)), ()):
                    out[kk] += int(a[i]) * int(b[j]) * c
        return self._reduce(out)

    def degree_of(self, v: np.ndarray) -> int | None:
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return None
        degs = {self.degrees[int(i)] for i in nz}
        if len(degs) != 1:
            raise AxiomViolation(f"{self.name}: inhomogeneous element")
        return degs.pop()

    def betti(self, degree: int) -> int:
        return sum(1 for d in self.degrees if d == degree)

    @property
    def top_degree(self) -> int:
        return max(self.degrees)

    def describe(self, v: np.ndarray) -> str:
        terms = [f"{self.basis[int(i)]}" if v[i] == 1 else f"{int(v[i])}*{self.basis[int(i)]}"
                 for i in np.nonzero(v)[0]]
        return " + ".join(terms) if terms else "0"

    def comm_sign(self, di: int, dj: int) -> int:
        if self.coeff == "z2":
            return 1
        return -1 if ((di + self.sign_shift) * (dj + self.sign_shift)) % 2 else 1


def _validate_ring(ring: GradedRing):
    B = len(ring.basis)
    if B == 0:
        raise ParseError(f"{ring.name}: empty basis")
    for (i, j), terms in ring.table.items():
        want = ring.degrees[i] + ring.degrees[j] + ring.shift
        for kk, c in terms:
            if c and ring.degrees[kk] != want:
                raise AxiomViolation(
                    f"{ring.name}: degree law fails on {ring.basis[i]}*{ring.basis[j]}"
                    f" -> {ring.basis[kk]}")
    eye = np.eye(B, dtype=np.int64)
    prod = [[ring.multiply(eye[i], eye[j]) for j in range(B)] for i in range(B)]
    for i in range(B):
        for j in range(B):
            sign = ring.comm_sign(ring.degrees[i], ring.degrees[j])
            lhs = prod[j][i]
            rhs = ring._reduce(sign * prod[i][j])
            if not np.array_equal(lhs, rhs):
                raise AxiomViolation(
                    f"{ring.name}: commutativity fails on "
                    f"({ring.basis[i]}, {ring.basis[j]})")
    for i in range(B):
        for j in range(B):
            for kk in range(B):
                lhs = ring.multiply(prod[i][j], eye[kk])
                rhs = ring.multiply(eye[i], prod[j][kk])
                if not np.array_equal(lhs, rhs):
                    raise AxiomViolation(
                        f"{ring.name}: associativity fails on triple "
                        f"({ring.basis[i]}, {ring.basis[j]}, {ring.basis[kk]})")
    if ring.unit is not None:
        u = ring.element(ring.unit)
        for i in range(B):
            if not (np.array_equal(ring.multiply(u, eye[i]), eye[i])
                    and np.array_equal(ring.multiply(eye[i], u), eye[i])):
                raise AxiomViolation(f"{ring.name}: declared unit is not a unit")


def load_ring(text: str, name: str = "ring") -> GradedRing:
    """Parse and validate a ring description.

    Format: `coeff:`, `shift:`, `sign_shift:`, optional `unit:`, one
    `basis: name degree` line per generator and `product: a b -> k:c ...`
    lines (`-> 0` for an explicit zero).  Products for the transposed pair
    are filled in by the commutation sign when omitted; unit products are
    implied.  Raises ParseError on malformed input and AxiomViolation when
    a ring axiom fails (naming the offending tuple).
    """
    coeff = "z2"
    shift = 0
    sign_shift = 0
    unit = None
    basis: list[str] = []
    degrees: list[int] = []
    raw_products: list[tuple[str, str, list[tuple[str, int]]]] = []
    rname = name
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, rest = line.split(":", 1)
        except ValueError:
            raise ParseError(f"line {lineno}: expected 'key: value'") from None
        key = key.strip()
        rest = rest.strip()
        if key == "name":
            rname = rest
        elif key == "coeff":
            if rest not in ("z2", "z"):
                raise ParseError(f"line {lineno}: coeff must be z2 or z")
            coeff = rest
        elif key == "shift":
            shift = int(rest)
        elif key == "sign_shift":
            sign_shift = int(rest)
        elif key == "unit":
            unit = rest
        elif key == "basis":
            parts = rest.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: basis needs 'name degree'")
            basis.append(parts[0])
            degrees.append(int(parts[1]))
        elif key == "product":
            try:
                lhs, rhs = rest.split("->")
                a, b = lhs.split()
            except ValueError:
                raise ParseError(f"line {lineno}: malformed product") from None
            terms: list[tuple[str, int]] = []
            rhs = rhs.strip()
            if rhs != "0":
                for term in rhs.split():
                    if ":" in term:
                        nm, cs = term.split(":")
                        terms.append((nm, int(cs)))
                    else:
                        terms.append((term, 1))
            raw_products.append((a, b, terms))
        else:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
    if not basis:
        raise ParseError(f"{rname}: empty basis")
    idx = {nm: i for i, nm in enumerate(basis)}
    if len(idx) != len(basis):
        raise ParseError(f"{rname}: duplicate basis names")
    table: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}

    def put(i, j, terms):
        if (i, j) in table and tuple(table[(i, j)]) != tuple(terms):
            raise ParseError(
                f"{rname}: conflicting products for ({basis[i]}, {basis[j]})")
        table[(i, j)] = tuple(terms)

    for a, b, terms in raw_products:
        if a not in idx or b not in idx or any(nm not in idx for nm, _ in terms):
            raise ParseError(f"{rname}: product references unknown element")
        put(idx[a], idx[b], [(idx[nm], c) for nm, c in terms])
    if unit is not None:
        if unit not in idx:
            raise ParseError(f"{rname}: unit {unit!r} not in basis")
        ui = idx[unit]
        for i in range(len(basis)):
            table.setdefault((ui, i), ((i, 1),))
            table.setdefault((i, ui), ((i, 1),))
    # fill transposed pairs by the commutation sign
    sgn = (lambda di, dj: 1) if coeff == "z2" else (
        lambda di, dj: -1 if ((di + sign_shift) * (dj + sign_shift)) % 2 else 1)
    for (i, j) in list(table.keys()):
        if (j, i) not in table:
            s = sgn(degrees[i], degrees[j])
            table[(j, i)] = tuple((kk, s * c) for kk, c in table[(i, j)])
    ring = GradedRing(rname, coeff, tuple(basis), tuple(degrees), shift,
                      sign_shift, unit, table)
    _validate_ring(ring)
    return ring


def load_ring_file(path: str) -> GradedRing:
    with open(path) as fh:
        return load_ring(fh.read(), name=path)


def builtin_ring(name: str) -> GradedRing:
    res = importlib.resources.files("loopgeo").joinpath(f"data/{name}.ring")
    try:
        text = res.read_text()
    except FileNotFoundError:
        raise ParseError(f"no builtin ring {name!r}") from None
    return load_ring(text, name=name)


# -- closed-geodesic models --------------------------------------------------------

@dataclass(frozen=True)
class ClosedGeodesicModel:
    """All-geodesics-closed data: dimension, prime length, first index, and
    the (co)homology rings of the unit tangent sphere bundle."""
    name: str
    n: int
    prime_length: float
    lam1: int
    homology: GradedRing
    cohomology: GradedRing
    base_betti: tuple[int, ...]      # Betti numbers of M itself
    orientable: bool
    coeff: str = "z2"

    @property
    def b(self) -> int:
        return self.lam1 + self.n - 1

    @property
    def h(self) -> int:
        return self.lam1 + 2 * self.n - 1

    def lam_r(self, r: int) -> int:
        # maximal index growth of the iterated prime geodesics
        return r * self.lam1 + (r - 1) * (self.n - 1)


_BUILTIN_MODELS = {
    # name: (n, prime length, lam1, homology ring, cup ring, betti(M), orientable)
    "s2": (2, 2 * math.pi, 1, "s2_sm", "s2_sm_coh", (1, 0, 1), True),
    "s3": (3, 2 * math.pi, 2, "s3_sm", "s3_sm_coh", (1, 0, 0, 1), True),
    "rp2": (2, math.pi, 0, "rp2_sm", "rp2_sm_coh", (1, 1, 1), False),
}


def closed_geodesic_model(name: str, coeff: str = "z2") -> ClosedGeodesicModel:
    """Built-in all-geodesics-closed models: s2, s3, rp2 (Z/2 payload rings;
    s3 also supports coeff='z' since its rings are torsion free)."""
    if name not in _BUILTIN_MODELS:
        raise NotAllGeodesicsClosed(
            f"{name!r} is not an all-geodesics-closed builtin (have: "
            f"{sorted(_BUILTIN_MODELS)})")
    n, ell, lam1, hname, cname, betti, orient = _BUILTIN_MODELS[name]
    if coeff == "z":
        if name != "s3":
            raise NotAllGeodesicsClosed(
                f"integer payload rings for {name!r} carry torsion; use z2")
        hname, cname = hname + "_z", cname + "_z"
    elif coeff != "z2":
        raise ParseError("coeff must be z2 or z")
    return ClosedGeodesicModel(name, n, ell, lam1, builtin_ring(hname),
                               builtin_ring(cname), betti, orient, coeff)


def model_for_geometry(kind: str, coeff: str = "z2",
                       n: int = 2) -> ClosedGeodesicModel:
    """Closed-geodesic ring data for a geometric model kind; refuses kinds
    whose geodesics are not all closed (flat torus, generic perturbations)."""
    if kind == "sphere":
        return closed_geodesic_model("s2" if n == 2 else "s3", coeff)
    raise NotAllGeodesicsClosed(
        f"model kind {kind!r} does not have all geodesics closed with one "
        "prime length")


# -- level classes ------------------------------------------------------------------

@dataclass(frozen=True)
class LevelClass:
    """A (co)homology class carrying degree, level, and filtration data.

    Homology levels are upper bounds for the critical value of the class;
    cohomology levels are lower bounds.  The filtration index r is stored
    explicitly (level = r * prime length, exact as a rational).
    """
    variant: str                  # "homology" | "cohomology"
    degree: int
    level_r: Fraction
    model: ClosedGeodesicModel | None = None
    payload: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.variant not in ("homology", "cohomology"):
            raise VariantMismatch(f"unknown variant {self.variant!r}")
        if self.level_r < 0:
            raise ValueError("levels are nonnegative")

    @property
    def level_value(self) -> float | None:
        if self.model is None:
            return None
        return float(self.level_r) * self.model.prime_length

    def ring(self) -> GradedRing:
        if self.model is None:
            raise VariantMismatch("class carries no model")
        return self.model.homology if self.variant == "homology" else self.model.cohomology

    def is_zero(self) -> bool:
        return self.payload is not None and not np.any(self.payload)


def _check_pair(x: LevelClass, y: LevelClass, variant: str):
    if x.variant != variant or y.variant != variant:
        raise VariantMismatch(f"both factors must be {variant} classes")
    if (x.model is None) != (y.model is None) or (
            x.model is not None and y.model is not None
            and x.model.name != y.model.name):
        raise VariantMismatch("factors live over different models")


def cs_product(x: LevelClass, y: LevelClass) -> LevelClass:
    """Loop-homology product: degree i + j - n, levels add; the payload is
    the intersection product in H(SM) with filtration indices added."""
    _check_pair(x, y, "homology")
    n = x.model.n if x.model is not None else 2
    degree = x.degree + y.degree - n
    level = x.level_r + y.level_r
    payload = None
    if x.payload is not None and y.payload is not None and x.model is not None:
        ring = x.model.homology
        payload = ring.multiply(x.payload, y.payload)
        pd = ring.degree_of(payload)
        if pd is not None:
            implied = pd + x.model.lam1 + (int(level) - 1) * x.model.b
            if implied != degree:
                raise AxiomViolation("payload degree contradicts the degree law")
    return LevelClass("homology", degree, level, x.model, payload,
                      label=f"({x.label})*({y.label})" if x.label and y.label else "")


def co_product(x: LevelClass, y: LevelClass) -> LevelClass:
    """Loop-cohomology product: degree i + j + n - 1, levels add; the
    payload is the cup product in H^*(SM) with filtration indices added."""
    _check_pair(x, y, "cohomology")
    n = x.model.n if x.model is not None else 2
    degree = x.degree + y.degree + n - 1
    level = x.level_r + y.level_r
    payload = None
    if x.payload is not None and y.payload is not None and x.model is not None:
        ring = x.model.cohomology
        payload = ring.multiply(x.payload, y.payload)
        pd = ring.degree_of(payload)
        if pd is not None:
            implied = pd + x.model.lam1 + (int(level) - 1) * x.model.b
            if implied != degree:
                raise AxiomViolation("payload degree contradicts the degree law")
    return LevelClass("cohomology", degree, level, x.model, payload,
                      label=f"({x.label})co*({y.label})" if x.label and y.label else "")


def phi_iso(model: ClosedGeodesicModel, a, m: int) -> LevelClass:
    """Polynomial-ring parametrization of level homology: a T^m lands in
    degree deg(a) + lam1 + (m-1) b at level m."""
    if m < 1:
        raise ValueError("filtration index m must be >= 1")
    vec = model.homology.element(a) if isinstance(a, str) else np.asarray(a)
    pd = model.homology.degree_of(vec)
    if pd is None:
        return LevelClass("homology", 0, Fraction(m), model, vec, label="0")
    degree = pd + model.lam1 + (m - 1) * model.b
    return LevelClass("homology", degree, Fraction(m), model, vec,
                      label=f"Phi({model.homology.describe(vec)}T^{m})")


def psi_iso(model: ClosedGeodesicModel, a, m: int) -> LevelClass:
    """Cohomology mirror of phi_iso, for the cup ring of SM."""
    if m < 1:
        raise ValueError("filtration index m must be >= 1")
    vec = model.cohomology.element(a) if isinstance(a, str) else np.asarray(a)
    pd = model.cohomology.degree_of(vec)
    if pd is None:
        return LevelClass("cohomology", 0, Fraction(m), model, vec, label="0")
    degree = pd + model.lam1 + (m - 1) * model.b
    return LevelClass("cohomology", degree, Fraction(m), model, vec,
                      label=f"Psi({model.cohomology.describe(vec)}T^{m})")


def theta_class(model: ClosedGeodesicModel) -> LevelClass:
    """Top-degree level-one homology class (fundamental payload at T^1)."""
    top = model.homology.basis[int(np.argmax(model.homology.degrees))]
    return phi_iso(model, top, 1)


def omega_class(model: ClosedGeodesicModel) -> LevelClass:
    """Lowest-degree level-one cohomology class (unit payload at T^1)."""
    low = model.cohomology.basis[int(np.argmin(model.cohomology.degrees))]
    return psi_iso(model, low, 1)


def betti_series(model: ClosedGeodesicModel, max_degree: int) -> list[int]:
    """Loop-space Betti numbers from the perfect Morse(-Bott) decomposition:
    b_k = b_k(M) + sum over r >= 1 of b_{k - lam_r}(SM)."""
    out = []
    for degree in range(max_degree + 1):
        b = model.base_betti[degree] if 0 <= degree < len(model.base_betti) else 0
        r = 1
        while model.lam_r(r) <= degree:
            b += model.homology.betti(degree - model.lam_r(r))
            r += 1
        out.append(b)
    return out


# -- nondegenerate level-product tables ----------------------------------------------

@dataclass(frozen=True)
class TableEntry:
    expression: str
    value: str          # class name, "0", or "undetermined"
    degree: int | None  # degree of the product expression
    reason: str


def nondegenerate_table(lams: list[int], n: int, lam1: int, r: int) -> dict[str, TableEntry]:
    """Level products of the local classes of a nondegenerate prime orbit.

    Needs the index sequence through r*n for the cohomology rows; rows whose
    hypotheses are not met come back "undetermined" rather than guessed.
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    if len(lams) < r or len(lams) < n:
        raise InsufficientSequence(f"need indices through max(r, n) = {max(r, n)}")
    if lams[0] != lam1:
        raise ValueError("lam sequence does not start at lam1")

    def lmin(m):
        return m * lam1 - (m - 1) * (n - 1)

    def lmax(m):
        return m * lam1 + (m - 1) * (n - 1)

    lam_r = lams[r - 1]
    lam_n = lams[n - 1]
    out: dict[str, TableEntry] = {}

    # powers of the bottom classes vanish outright
    deg_sig = r * lam1 - (r - 1) * n
    out["sigma1_pow_r"] = TableEntry(f"sigma_1^*{r}", "0", deg_sig,
                                     "single-point support")
    deg_tau = r * (lam1 + 1) + (r - 1) * (n - 1)
    out["tau1_pow_r"] = TableEntry(f"tau_1^co*{r}", "0", deg_tau,
                                   "single-point support")

    # homology rows
    deg_mixed = (r - 1) * (lam1 + 1) + lam1 - (r - 1) * n   # = lmin(r)
    deg_pow = r * (lam1 + 1) - (r - 1) * n                   # = lmin(r) + 1
    if lam_r == lmin(r) and lam_n == lmin(n):
        out["sbar1_pow_(r-1)_times_sigma1"] = TableEntry(
            f"sbar_1^*{r - 1} * sigma_1", f"sigma_{r}", deg_mixed, "minimal growth")
        if (n - lam1) % 2 == 0:
            out["sbar1_pow_r"] = TableEntry(
                f"sbar_1^*{r}", "0", deg_pow,
                "parity: n - lam1 even forces 2x^2 = 0 (inconsistent with "
                "orientable minimal growth)")
        else:
            out["sbar1_pow_r"] = TableEntry(
                f"sbar_1^*{r}", f"sbar_{r}", deg_pow, "minimal growth")
    elif lam_r != lmin(r):
        out["sbar1_pow_(r-1)_times_sigma1"] = TableEntry(
            f"sbar_1^*{r - 1} * sigma_1", "0", deg_mixed,
            "index above minimal growth: degrees miss the level group")
        out["sbar1_pow_r"] = TableEntry(
            f"sbar_1^*{r}", "0", deg_pow,
            "parity vanishing" if (n - lam1) % 2 == 0
            else "index above minimal growth: degrees miss the level group")
    else:
        verdict = "undetermined"
        out["sbar1_pow_(r-1)_times_sigma1"] = TableEntry(
            f"sbar_1^*{r - 1} * sigma_1", verdict, deg_mixed,
            "lam_r minimal but lam_n not: outside the table rows")
        out["sbar1_pow_r"] = TableEntry(
            f"sbar_1^*{r}", "0" if (n - lam1) % 2 == 0 else verdict, deg_pow,
            "parity vanishing" if (n - lam1) % 2 == 0
            else "lam_r minimal but lam_n not: outside the table rows")

    # cohomology rows (need the sequence through r*n for the max-growth row)
    deg_cmixed = (r - 1) * lam1 + (lam1 + 1) + (r - 1) * (n - 1)  # = lmax(r) + 1
    deg_cpow = r * lam1 + (r - 1) * (n - 1)                        # = lmax(r)
    if len(lams) >= r * n:
        lam_rn = lams[r * n - 1]
        if lam_rn == lmax(r * n):
            out["tbar1_pow_(r-1)_times_tau1"] = TableEntry(
                f"tbar_1^co*{r - 1} co* tau_1", f"tau_{r}", deg_cmixed,
                "maximal growth")
            if (n - lam1) % 2 == 0:
                out["tbar1_pow_r"] = TableEntry(
                    f"tbar_1^co*{r}", "0", deg_cpow,
                    "parity: n - lam1 even forces 2x^2 = 0 (inconsistent with "
                    "orientable maximal growth)")
            else:
                out["tbar1_pow_r"] = TableEntry(
                    f"tbar_1^co*{r}", f"tbar_{r}", deg_cpow, "maximal growth")
        elif lam_r != lmax(r):
            out["tbar1_pow_(r-1)_times_tau1"] = TableEntry(
                f"tbar_1^co*{r - 1} co* tau_1", "0", deg_cmixed,
                "index below maximal growth: degrees miss the level group")
            out["tbar1_pow_r"] = TableEntry(
                f"tbar_1^co*{r}", "0", deg_cpow,
                "parity vanishing" if (n - lam1) % 2 == 0
                else "index below maximal growth: degrees miss the level group")
        else:
            verdict = "undetermined"
            out["tbar1_pow_(r-1)_times_tau1"] = TableEntry(
                f"tbar_1^co*{r - 1} co* tau_1", verdict, deg_cmixed,
                "lam_r maximal but lam_rn not: outside the table rows")
            out["tbar1_pow_r"] = TableEntry(
                f"tbar_1^co*{r}", "0" if (n - lam1) % 2 == 0 else verdict,
                deg_cpow,
                "parity vanishing" if (n - lam1) % 2 == 0
                else "lam_r maximal but lam_rn not: outside the table rows")
    elif lam_r != lmax(r):
        out["tbar1_pow_(r-1)_times_tau1"] = TableEntry(
            f"tbar_1^co*{r - 1} co* tau_1", "0", deg_cmixed,
            "index below maximal growth: degrees miss the level group")
        out["tbar1_pow_r"] = TableEntry(
            f"tbar_1^co*{r}", "0", deg_cpow,
            "parity vanishing" if (n - lam1) % 2 == 0
            else "index below maximal growth: degrees miss the level group")
    else:
        raise InsufficientSequence(
            f"cohomology rows need the index sequence through r*n = {r * n}")
    return out


# -- nilpotence ---------------------------------------------------------------------

@dataclass(frozen=True)
class NilpotenceResult:
    decided: bool
    vanishing_power: int | None
    b_values: tuple[int, ...]
    note: str

    def __str__(self):
        if self.decided:
            return f"vanishes at power m = {self.vanishing_power}"
        return "not decided within sequence"


def nilpotence_check(lams: list[int], degree_i: int, n: int,
                     variant: str = "homology") -> NilpotenceResult:
    """Smallest power at which a level class of the given degree must die.

    A degree-i level class survives its m-th power only if lam_m lies in
    {b-1, b} where b is the degree of the m-th power in level (co)homology:
    b = m*i - (m-1)(n-1) for homology (implemented as printed in the source
    theorem; the plain m-fold product degree law would give m*i - (m-1)*n,
    and the discrepancy is surfaced in the note, never silently fixed) and
    b = m*i + (m-1)(n-1) for cohomology.
    """
    if len(lams) < 2:
        raise SequenceTooShort("need the index sequence through m = 2 at least")
    if variant not in ("homology", "cohomology"):
        raise VariantMismatch(f"unknown variant {variant!r}")
    note = ("homology power degree b = m*i - (m-1)(n-1) as printed; the raw "
            "m-fold product degree law reads m*i - (m-1)*n"
            if variant == "homology" else
            "cohomology power degree b = m*i + (m-1)(n-1)")
    lam1 = lams[0]
    if lam1 not in (degree_i - 1, degree_i):
        return NilpotenceResult(True, 1, (degree_i,),
                                "degree misses the level group already at m = 1; "
                                + note)
    bs = [degree_i]
    for m in range(2, len(lams) + 1):
        if variant == "homology":
            b = m * degree_i - (m - 1) * (n - 1)
        else:
            b = m * degree_i + (m - 1) * (n - 1)
        bs.append(b)
        if lams[m - 1] not in (b - 1, b):
            return NilpotenceResult(True, m, tuple(bs), note)
    return NilpotenceResult(False, None, tuple(bs), note)


# -- Eliashberg-type degree bound -----------------------------------------------------

def eliashberg_bound(d1: int, d2: int, n: int, g: int) -> int:
    """Upper bound for the essential degree at the sum of two levels, given
    a cohomology ring generated in degrees <= g: d1 + d2 + 2n + g - 2."""
    if min(d1, d2, n, g) < 0:
        raise ValueError("inputs must be nonnegative")
    return d1 + d2 + 2 * n + g - 2


def essential_degree(model: ClosedGeodesicModel, r: int) -> int:
    """Maximal degree carried by the level ring at filtration <= r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return model.homology.top_degree + model.lam1 + (r - 1) * model.b


def cohomology_generator_degree(model: ClosedGeodesicModel) -> int:
    """Maximal generator degree of the graded cohomology ring: the T^1
    classes generate, with degrees deg(a) + lam1."""
    return model.cohomology.top_degree + model.lam1


# -- based loop space (degree bookkeeping) --------------------------------------------

def based_loop_degrees(model: ClosedGeodesicModel, r: int) -> tuple[int, int]:
    """Degrees of the level-r classes of the based-loop graded algebra
    H^*(S^{n-1})[T]: lam_r and lam_r + n - 1."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return model.lam_r(r), model.lam_r(r) + model.n - 1


def based_restriction_surjective(model: ClosedGeodesicModel) -> bool | None:
    """Whether restriction to the based fiber is onto at the bottom level:
    true for odd spheres; not settled for even spheres (returns None)."""
    if model.name in ("s3",):
        return True
    if model.name in ("s2",):
        return None
    return None
