"""Exception hierarchy shared by every funbandit module."""

from __future__ import annotations


class FunBanditError(Exception):
    """Base class for all library errors."""


class DomainError(FunBanditError, ValueError):
    """An argument lies outside the operation's domain."""


class UnsupportedFunctional(FunBanditError):
    """No ground truth is defined for this (distribution, functional) pair."""


class UnsupportedDistribution(FunBanditError):
    """The operation needs a continuous distribution."""


class EmptySample(FunBanditError, ValueError):
    pass


class InsufficientSamples(FunBanditError, ValueError):
    pass


class DegenerateSample(FunBanditError, ValueError):
    pass


class InsufficientBudget(FunBanditError):
    """floor(T / H) == 0: not even one pull per arm per round."""


class BiasDominates(FunBanditError):
    """Estimator bias reaches half the gap, so the bound is vacuous."""


class SampleConditionUnmet(FunBanditError):
    """The per-arm sample count is below a bound's stated precondition."""


class ConfigError(FunBanditError):
    """Invalid experiment configuration document."""


class InternalError(FunBanditError):
    pass
