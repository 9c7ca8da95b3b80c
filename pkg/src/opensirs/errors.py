"""Exception and warning types shared across the package.

The CLI maps these onto exit codes: config/usage problems exit 1, numerical
or contract failures exit 2 with the error class name in the message.
"""

from __future__ import annotations

__all__ = [
    "OpenSirsError",
    "ConfigError",
    "RestPointCountError",
    "SpecialCaseError",
    "FieldVanishesOnCurve",
    "NoConvergence",
    "CurveConstructionError",
    "StepSizeUnderflow",
    "NonFiniteState",
    "EmptyInterval",
    "PersistenceFailure",
    "InconsistentWithTheorem",
    "NearDegenerateWarning",
]


class OpenSirsError(Exception):
    """Base class for numerical and contract failures."""


class ConfigError(Exception):
    """Malformed run configuration or command usage (CLI exit code 1)."""


class RestPointCountError(OpenSirsError):
    """Rest-point solver produced an impossible configuration."""


class SpecialCaseError(OpenSirsError):
    """Operation requires the invariant-axes case b = beta1 = gamma = 0."""


class FieldVanishesOnCurve(OpenSirsError):
    """A winding-number curve passes through (or too near) a field zero."""


class NoConvergence(OpenSirsError):
    """Adaptive refinement exhausted its sample budget."""


class CurveConstructionError(OpenSirsError):
    """Requested curve geometry is invalid (overlap, enclosure, radius)."""


class StepSizeUnderflow(OpenSirsError):
    """Integrator could not advance without shrinking steps below limits."""


class NonFiniteState(OpenSirsError):
    """Integration produced NaN or infinity."""


class EmptyInterval(OpenSirsError):
    """Bistable construction interval is empty for the given rates."""


class PersistenceFailure(OpenSirsError):
    """Perturbation off the special case lost the bistable configuration."""


class InconsistentWithTheorem(OpenSirsError):
    """Nondegenerate rest-point configuration outside the A/B dichotomy.

    Raised as a solver-bug assertion: with strictly positive parameters the
    only nondegenerate possibilities are one interior sink, or two interior
    sinks plus one interior saddle.
    """


class NearDegenerateWarning(UserWarning):
    """Two rest points nearly coincide; locations are ill-conditioned."""
