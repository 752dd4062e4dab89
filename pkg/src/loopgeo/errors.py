"""Exception types shared across the package."""


class LoopGeoError(Exception):
    """Base class for all package errors."""


# -- geometry / manifold models ----------------------------------------------

class ConfigError(LoopGeoError):
    """Malformed or inconsistent model/campaign configuration."""


class PointsTooFar(LoopGeoError):
    """Two points violate the injectivity-radius bound of the model."""


class NoConvergence(LoopGeoError):
    """An iterative solve (shooting or critical-point search) did not converge."""


class StepTooCoarse(LoopGeoError):
    """Fixed-step integration drifted beyond the speed-conservation tolerance."""


class IntegrationFailure(LoopGeoError):
    """Jacobi-equation integration produced an unusable fundamental matrix."""


# -- loop space ---------------------------------------------------------------

class ZeroLengthLoop(LoopGeoError):
    """Operation undefined on a constant loop."""


class BasepointMismatch(LoopGeoError):
    """Concatenation requires both loops to share the basepoint vertex."""


class BothConstant(LoopGeoError):
    """Both concatenation factors are constant loops."""


# -- solver -------------------------------------------------------------------

class CollapsedToConstant(LoopGeoError):
    """Energy descent flowed the seed into the constant loops."""


class SpectralGapTooSmall(LoopGeoError):
    """No clean gap around the eigenvalue-classification cutoff."""


# -- index iteration ----------------------------------------------------------

class EigenvalueOnGridAmbiguous(LoopGeoError):
    """|trace P -+ 2| is below tolerance but the Jordan type is unresolved."""


class ParabolicAtMinusOne(LoopGeoError):
    """P has eigenvalue -1 of parabolic type; jump data is not determined."""


class InconsistentSystem(LoopGeoError):
    """No integer omega-index solves the given iterate indices."""


class GrowthFlagInconsistent(LoopGeoError):
    """Declared growth flag contradicts the supplied indices."""


class InsufficientSequence(LoopGeoError):
    """Index sequence is too short for the requested table row."""


class SequenceTooShort(LoopGeoError):
    """Index sequence is too short to evaluate the predicate at all."""


# -- graded rings -------------------------------------------------------------

class VariantMismatch(LoopGeoError):
    """Product of classes from different (co)homology variants or models."""


class ParseError(LoopGeoError):
    """Malformed ring description, loop file, or orbit record."""


class AxiomViolation(LoopGeoError):
    """A ring axiom (degree law, associativity, commutativity) fails."""


class NotAllGeodesicsClosed(LoopGeoError):
    """Operation requires a model in which all geodesics are closed."""
