from __future__ import annotations


class MofilterError(Exception):
    """Basisklasse aller Fehler des Solvers."""


class NonFiniteValue(MofilterError):
    """An evaluator returned NaN or +-inf."""


class SingularInterpolation(MofilterError):
    """The RBF interpolation system is numerically singular."""


class Infeasible(MofilterError):
    """The linearized feasible set is empty (no normal step)."""


class NumericalFailure(MofilterError):
    """A dense LP/QP kernel hit its iteration cap."""


class ZeroDirection(MofilterError):
    pass


class FeasiblePointRejected(MofilterError):
    """A pair with theta == 0 was offered to the filter."""


class ZeroModelDecrease(MofilterError):
    pass


class RestorationFailed(MofilterError):
    """Restoration could not find a compatible, filter-acceptable point."""


class ConfigError(MofilterError, ValueError):
    """Invalid configuration value or unknown key."""
