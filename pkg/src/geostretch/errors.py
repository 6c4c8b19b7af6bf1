"""Exception hierarchy shared by all geostretch modules."""

from __future__ import annotations


class GeostretchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GeostretchError, ValueError):
    """A state lies outside the model's admissible domain."""

    def __init__(self, message: str, last_valid_time: float | None = None):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class NonFiniteError(GeostretchError, ArithmeticError):
    """A field value or an intermediate tensor contains NaN or Inf."""


class EquilibriumError(GeostretchError, ValueError):
    """The field vanishes (numerically), so no tangent/normal frame exists."""


class UnsupportedDimensionError(GeostretchError, ValueError):
    """An operation defined only for planar systems was called with n != 2."""


class DegeneratePlaneError(GeostretchError, ValueError):
    """Two tangent vectors do not span a plane."""


class SingularObjectiveError(GeostretchError, ValueError):
    """Every sample of a fiber objective was singular."""
