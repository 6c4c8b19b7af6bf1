"""Numerical verification of the geometric identities at sample points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    curvature_from_bundle,
    geodesic_deviation,
    geodesic_residual,
    metric_at,
    metric_compatibility_defect,
    metric_partials,
    riemann_symmetry_defects,
    sectional_curvature,
    tangent_T,
)
from .stretching import geodesic_rate_from, lift
from .vectorfield import VectorFieldModel, derivatives


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name:<28s} max={self.measured:.3e} tol={self.tolerance:.1e}"


def sample_points(model: VectorFieldModel, box: list[tuple[float, float]], count: int,
                  seed: int = 0) -> np.ndarray:
    """``count`` in-domain points drawn uniformly from ``box`` (rejection sampling)."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    pts = []
    for _ in range(1000 * count):
        p = rng.uniform(lo, hi)
        if model.in_domain(p):
            pts.append(p)
            if len(pts) == count:
                return np.array(pts)
    raise ValueError(f"could not draw {count} in-domain points from box {box}")


def _corrupted_metric(bundle):
    # flips the sign of the off-diagonal blocks; Christoffels stay those of the true metric
    md = metric_partials(bundle)
    g, dg = md.g.copy(), md.dg.copy()
    n = bundle.value.size
    g[:n, n] *= -1
    g[n, :n] *= -1
    dg[:n, n, :] *= -1
    dg[n, :n, :] *= -1
    return type(md)(g=g, g_inv=md.g_inv, dg=dg)


def run_checks(model: VectorFieldModel, points, method: str = "auto", lifts_per_point: int = 10,
               seed: int = 0, corrupt_metric_sign: bool = False) -> list[CheckResult]:
    """Evaluate every identity at every point and report the worst violation of each."""
    rng = np.random.default_rng(seed)
    n = model.dimension
    worst: dict[str, float] = {}

    def record(name, value):
        worst[name] = max(worst.get(name, 0.0), float(value))

    method_used = None
    for p in points:
        bundle = derivatives(model, p)
        curv = curvature_from_bundle(model, bundle, method)
        method_used = curv.method
        md = curv.metric
        g, f = md.g, bundle.value
        T = tangent_T(f)

        record("metric_unit_velocity", abs(T @ g @ T - 1.0))
        record("det_metric", abs(np.linalg.det(g) - 1.0))
        record("metric_inverse", np.max(np.abs(g @ md.g_inv - np.eye(n + 1))))
        record("closed_form_inverse", np.max(np.abs(md.g_inv - np.linalg.inv(g))))
        gamma = curv.christoffel
        record("christoffel_symmetry", np.max(np.abs(gamma - gamma.transpose(0, 2, 1))))
        check_md = _corrupted_metric(bundle) if corrupt_metric_sign else md
        record("metric_compatibility", np.max(np.abs(metric_compatibility_defect(check_md, gamma))))
        for key, val in riemann_symmetry_defects(curv).items():
            record(f"riemann_{key}", val)
        record("deviation_of_velocity", np.max(np.abs(geodesic_deviation(curv, T, T))))
        record("geodesic_residual", np.max(np.abs(geodesic_residual(model, p))))
        for _ in range(lifts_per_point):
            v = rng.standard_normal(n)
            lv = lift(v)
            record("lift_orthogonality", abs(lv @ g @ T))
            rate = geodesic_rate_from(curv, f, v)
            k = sectional_curvature(curv, md, lv, T)
            record("rate_equals_sectional", abs(rate - k) / max(1.0, abs(k)))
        if model.name == "constant":
            record("flat_curvature", np.max(np.abs(curv.riemann)))
        # metric_at must agree with the partials' metric
        record("metric_consistency", np.max(np.abs(metric_at(f).g - g)))

    analytic = method_used == "analytic"
    tolerances = {
        "metric_unit_velocity": 1e-10,
        "det_metric": 1e-10,
        "metric_inverse": 1e-10,
        "closed_form_inverse": 1e-8,
        "christoffel_symmetry": 0.0,
        "metric_compatibility": 1e-8 if model.jacobian is not None else 1e-5,
        "riemann_antisym_first_pair": 1e-8 if analytic else 1e-4,
        "riemann_antisym_second_pair": 1e-8 if analytic else 1e-4,
        "riemann_pair_exchange": 1e-8 if analytic else 1e-4,
        "riemann_first_bianchi": 1e-8 if analytic else 1e-4,
        "deviation_of_velocity": 1e-10,
        "geodesic_residual": 1e-6,
        "lift_orthogonality": 1e-10,
        "rate_equals_sectional": 1e-9,
        "flat_curvature": 0.0,
        "metric_consistency": 0.0,
    }
    return [CheckResult(name, worst[name], tolerances[name]) for name in tolerances if name in worst]
