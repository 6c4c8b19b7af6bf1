"""Stretching rates and ratios, classical and geodesic.

The classical rate of a direction v is the Rayleigh quotient <J v, v> / <v, v>.
The geodesic rate replaces J by the deviation map s -> R(T, s)T of the
extended metric and the Euclidean product by g, acting on v lifted to (v, 0).
Because g(T, T) = 1 and g((v, 0), T) = 0, the geodesic rate equals the
sectional curvature of the plane spanned by (v, 0) and T.

Ratios divide the rate of the unit normal by the rate of the unit tangent of
the trajectory and are only defined for planar systems.  A ratio whose
denominator is below ``SINGULARITY_TOL`` in magnitude is reported as None.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EquilibriumError, UnsupportedDimensionError
from .geometry import CurvatureData, curvature_from_bundle, geodesic_deviation, tangent_T
from .vectorfield import DerivativeBundle, VectorFieldModel, derivatives

Array = np.ndarray

EQUILIBRIUM_TOL = 1e-10
SINGULARITY_TOL = 1e-10


@dataclass(frozen=True)
class FrameVectors:
    v_t: Array
    v_o: Array


@dataclass(frozen=True)
class StretchingReport:
    classical_tangent: float
    classical_normal: float
    classical_ratio: float | None
    geodesic_tangent: float
    geodesic_normal: float
    geodesic_ratio: float | None

    @property
    def classical_singular(self) -> bool:
        return self.classical_ratio is None

    @property
    def geodesic_singular(self) -> bool:
        return self.geodesic_ratio is None

    def as_row(self) -> list[float]:
        """The six scalars in field order, with NaN standing in for singular ratios."""
        nan = float("nan")
        return [
            self.classical_tangent, self.classical_normal,
            nan if self.classical_ratio is None else self.classical_ratio,
            self.geodesic_tangent, self.geodesic_normal,
            nan if self.geodesic_ratio is None else self.geodesic_ratio,
        ]


REPORT_FIELDS = (
    "classical_tangent", "classical_normal", "classical_ratio",
    "geodesic_tangent", "geodesic_normal", "geodesic_ratio",
)


def _nonzero(v) -> Array:
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("stretching rate of the zero vector is undefined")
    return v


def _ratio(num: float, den: float, tol: float) -> float | None:
    if abs(den) < tol:
        return None
    return num / den


def classical_rate(bundle: DerivativeBundle, v) -> float:
    """<J v, v> / <v, v>."""
    v = _nonzero(v)
    return float(v @ bundle.jacobian @ v / (v @ v))


def frame_at(f_val, equilibrium_tol: float = EQUILIBRIUM_TOL) -> FrameVectors:
    """Unit tangent f/|f| and its counterclockwise rotation (-f_2, f_1)/|f|."""
    f = np.asarray(f_val, dtype=float)
    if f.shape != (2,):
        raise UnsupportedDimensionError(f"tangent/normal frame needs a planar system, got n={f.size}")
    norm = float(np.hypot(f[0], f[1]))
    if norm < equilibrium_tol:
        raise EquilibriumError(f"|f| = {norm:.3e} is below the equilibrium threshold {equilibrium_tol:g}")
    return FrameVectors(v_t=f / norm, v_o=np.array([-f[1], f[0]]) / norm)


def lift(v) -> Array:
    """(v, 0): a state-space direction as a tangent vector of the extended space."""
    return np.append(np.asarray(v, dtype=float), 0.0)


def geodesic_rate_from(curv: CurvatureData, f_val, v) -> float:
    """g(R(T, v~)T, v~) / g(v~, v~) for v~ = lift(v) and T = (f, 1)."""
    lv = lift(_nonzero(v))
    T = tangent_T(f_val)
    g = curv.metric.g
    return float(geodesic_deviation(curv, T, lv) @ g @ lv / (lv @ g @ lv))


def geodesic_rate(model: VectorFieldModel, x, v, method: str = "auto") -> float:
    bundle = derivatives(model, x)
    curv = curvature_from_bundle(model, bundle, method)
    return geodesic_rate_from(curv, bundle.value, v)


def classical_ratio(model: VectorFieldModel, x, tol: float = SINGULARITY_TOL) -> float | None:
    """Normal over tangent classical rate; None when the tangent rate vanishes."""
    bundle = derivatives(model, x)
    fr = frame_at(bundle.value)
    return _ratio(classical_rate(bundle, fr.v_o), classical_rate(bundle, fr.v_t), tol)


def geodesic_ratio(model: VectorFieldModel, x, tol: float = SINGULARITY_TOL,
                   method: str = "auto") -> float | None:
    """Normal over tangent geodesic rate; None when the tangent rate vanishes."""
    bundle = derivatives(model, x)
    fr = frame_at(bundle.value)
    curv = curvature_from_bundle(model, bundle, method)
    return _ratio(geodesic_rate_from(curv, bundle.value, fr.v_o),
                  geodesic_rate_from(curv, bundle.value, fr.v_t), tol)


def full_report(model: VectorFieldModel, x, tol: float = SINGULARITY_TOL,
                method: str = "auto") -> StretchingReport:
    bundle = derivatives(model, x)
    fr = frame_at(bundle.value)
    curv = curvature_from_bundle(model, bundle, method)
    ct = classical_rate(bundle, fr.v_t)
    co = classical_rate(bundle, fr.v_o)
    gt = geodesic_rate_from(curv, bundle.value, fr.v_t)
    go = geodesic_rate_from(curv, bundle.value, fr.v_o)
    return StretchingReport(
        classical_tangent=ct, classical_normal=co, classical_ratio=_ratio(co, ct, tol),
        geodesic_tangent=gt, geodesic_normal=go, geodesic_ratio=_ratio(go, gt, tol),
    )
