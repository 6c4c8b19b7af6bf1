"""Extended phase space geometry of a vector field.

Coordinates are (x_1, ..., x_n, tau) with tau at index n.  The metric

    g = [[ I_n , -f      ],
         [ -f^T, 1 + f^T f]]

turns every solution curve t -> (x(t), t) into a geodesic of its
Levi-Civita connection.  It depends on x only through f(x), so nothing
here depends on tau.

Tensor layouts (all plain numpy arrays, N = n + 1):

    dg[i, j, k]              d g_ij / d coord_k
    christoffel[k, i, j]     Gamma^k_ij
    christoffel_partials[k, i, j, m]   d Gamma^k_ij / d coord_m
    riemann[l, i, j, k]      R^l_ijk, component l of R(e_i, e_j) e_k, where
                             R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    riemann_lowered[l, i, j, k] = g_lm R^m_ijk = g(R(e_i, e_j) e_k, e_l)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePlaneError, NonFiniteError
from .vectorfield import DerivativeBundle, VectorFieldModel, _derivatives_unchecked, _steps

Array = np.ndarray

DEGENERATE_PLANE_TOL = 1e-12


@dataclass(frozen=True)
class MetricData:
    g: Array
    g_inv: Array
    dg: Array | None = None

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))


@dataclass(frozen=True)
class CurvatureData:
    metric: MetricData
    christoffel: Array
    christoffel_partials: Array
    riemann: Array
    riemann_lowered: Array
    method: str


def state_part(model: VectorFieldModel, p) -> Array:
    """Drop the tau coordinate if ``p`` is an extended point of length n + 1."""
    p = np.asarray(p, dtype=float)
    if p.shape == (model.dimension + 1,):
        return p[:-1]
    return p


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def metric_at(f_val) -> MetricData:
    """Extended metric and its closed-form block inverse for a field value."""
    f = np.asarray(f_val, dtype=float).ravel()
    if not np.all(np.isfinite(f)):
        raise NonFiniteError(f"non-finite field value {f}")
    n = f.size
    g = np.eye(n + 1)
    g[:n, n] = -f
    g[n, :n] = -f
    g[n, n] = 1.0 + f @ f
    # Schur complement of the identity block is exactly 1
    g_inv = np.eye(n + 1)
    g_inv[:n, :n] += np.outer(f, f)
    g_inv[:n, n] = f
    g_inv[n, :n] = f
    return MetricData(g=g, g_inv=g_inv)


def metric_partials(bundle: DerivativeBundle) -> MetricData:
    """Metric, inverse and coordinate partials dg via the chain rule."""
    f, J = bundle.value, bundle.jacobian
    n = f.size
    md = metric_at(f)
    dg = np.zeros((n + 1, n + 1, n + 1))
    dg[:n, n, :n] = -J
    dg[n, :n, :n] = -J
    dg[n, n, :n] = 2.0 * (f @ J)
    return MetricData(g=md.g, g_inv=md.g_inv, dg=dg)


def _metric_second_partials(bundle: DerivativeBundle) -> Array:
    # d2g[i, j, k, m] = d^2 g_ij / d coord_k d coord_m
    f, J, H = bundle.value, bundle.jacobian, bundle.hessian
    n = f.size
    d2g = np.zeros((n + 1,) * 4)
    d2g[:n, n, :n, :n] = -H
    d2g[n, :n, :n, :n] = -H
    d2g[n, n, :n, :n] = 2.0 * (J.T @ J + np.einsum("i,ikm->km", f, H))
    return d2g


def _inverse_metric_partials(bundle: DerivativeBundle) -> Array:
    # dginv[i, j, m] = d g^ij / d coord_m
    f, J = bundle.value, bundle.jacobian
    n = f.size
    dginv = np.zeros((n + 1, n + 1, n + 1))
    dginv[:n, :n, :n] = np.einsum("am,b->abm", J, f) + np.einsum("a,bm->abm", f, J)
    dginv[:n, n, :n] = J
    dginv[n, :n, :n] = J
    return dginv


# ---------------------------------------------------------------------------
# connection and curvature, written for a generic metric
# ---------------------------------------------------------------------------

def christoffel_from_metric(g_inv: Array, dg: Array) -> Array:
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), symmetrized in (i, j)."""
    s = np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg
    gamma = 0.5 * np.einsum("kl,ijl->kij", g_inv, s)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def riemann_from_christoffel(gamma: Array, dgamma: Array) -> Array:
    """R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik."""
    d_term = np.einsum("ljki->lijk", dgamma)
    quad = np.einsum("lim,mjk->lijk", gamma, gamma)
    return d_term - d_term.transpose(0, 2, 1, 3) + quad - quad.transpose(0, 2, 1, 3)


def christoffel_at(bundle: DerivativeBundle) -> Array:
    """Christoffel symbols Gamma[k, i, j] of the extended metric."""
    md = metric_partials(bundle)
    return christoffel_from_metric(md.g_inv, md.dg)


def _christoffel_partials_analytic(bundle: DerivativeBundle, g_inv: Array, dg: Array) -> Array:
    s = np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg
    d2g = _metric_second_partials(bundle)
    # d_m S[i, j, l]
    ds = np.einsum("jlim->ijlm", d2g) + np.einsum("iljm->ijlm", d2g) - d2g
    dginv = _inverse_metric_partials(bundle)
    dgamma = 0.5 * (np.einsum("klm,ijl->kijm", dginv, s) + np.einsum("kl,ijlm->kijm", g_inv, ds))
    return 0.5 * (dgamma + dgamma.transpose(0, 2, 1, 3))


def _christoffel_partials_fd(model: VectorFieldModel, x: Array, fd_step: float | None) -> Array:
    n = model.dimension
    h = _steps(model, x, fd_step)
    dgamma = np.zeros((n + 1,) * 4)
    for m in range(n):
        e = np.zeros(n)
        e[m] = h[m]
        gp = christoffel_at(_derivatives_unchecked(model, x + e, fd_step))
        gm = christoffel_at(_derivatives_unchecked(model, x - e, fd_step))
        dgamma[..., m] = (gp - gm) / (2.0 * h[m])
    # d/dtau column stays zero
    return dgamma


def riemann_at(model: VectorFieldModel, x, method: str = "auto",
               fd_step: float | None = None) -> CurvatureData:
    """Christoffel symbols, their partials and the Riemann tensor at ``x``.

    ``method="fd"`` differentiates the Christoffel symbols by central
    differences over the state coordinates.  ``method="analytic"`` pushes the
    field's Hessian through the chain rule and needs no extra field
    evaluations.  ``"auto"`` picks analytic when the model has a closed-form
    Hessian.  ``x`` may also be an extended point (x, tau).
    """
    x = model.state(state_part(model, x))
    return curvature_from_bundle(model, _derivatives_unchecked(model, x, fd_step), method, fd_step)


def curvature_from_bundle(model: VectorFieldModel, bundle: DerivativeBundle, method: str = "auto",
                          fd_step: float | None = None) -> CurvatureData:
    """Same as :func:`riemann_at`, reusing an already evaluated bundle."""
    if method == "auto":
        method = "analytic" if model.hessian is not None else "fd"
    if method not in ("analytic", "fd"):
        raise ValueError(f"unknown curvature method {method!r}")
    x = bundle.point
    md = metric_partials(bundle)
    gamma = christoffel_from_metric(md.g_inv, md.dg)
    if method == "analytic":
        dgamma = _christoffel_partials_analytic(bundle, md.g_inv, md.dg)
    else:
        dgamma = _christoffel_partials_fd(model, x, fd_step)
    riemann = riemann_from_christoffel(gamma, dgamma)
    lowered = np.einsum("lm,mijk->lijk", md.g, riemann)
    if not np.all(np.isfinite(riemann)):
        raise NonFiniteError(f"non-finite curvature at {x}")
    return CurvatureData(metric=md, christoffel=gamma, christoffel_partials=dgamma,
                         riemann=riemann, riemann_lowered=lowered, method=method)


# ---------------------------------------------------------------------------
# vectors, deviation, sectional curvature
# ---------------------------------------------------------------------------

def tangent_T(f_val) -> Array:
    """Velocity (f(x), 1) of the extended-system solution through x."""
    return np.append(np.asarray(f_val, dtype=float), 1.0)


def geodesic_deviation(curv: CurvatureData, T, s) -> Array:
    """R(T, s)T, i.e. sum_ijk R^l_ijk T^i s^j T^k."""
    return np.einsum("lijk,i,j,k->l", curv.riemann, T, s, T)


def sectional_curvature(curv: CurvatureData, metric: MetricData, v, w) -> float:
    """K(v, w) = g(R(w, v)w, v) / (g(v, v) g(w, w) - g(v, w)^2).

    The slot order makes K(v~, T) = g(R(T, v~)T, v~) / (...) for a lifted
    vector v~ and the flow velocity T.  Note that with the stated curvature
    convention this is minus the textbook sectional curvature (a round
    sphere comes out negative); ratios of two such values are unaffected.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    g = metric.g
    denom = (v @ g @ v) * (w @ g @ w) - (v @ g @ w) ** 2
    if denom <= DEGENERATE_PLANE_TOL:
        raise DegeneratePlaneError(f"vectors {v} and {w} span a degenerate plane (|v^w|^2={denom:.3e})")
    num = np.einsum("lijk,i,j,k,lm,m->", curv.riemann, w, v, w, g, v)
    return float(num / denom)


def geodesic_residual(model: VectorFieldModel, x, fd_step: float | None = None) -> Array:
    """a^k + Gamma^k_ij T^i T^j along the flow, with a = (J f, 0); zero for a geodesic."""
    bundle = derivatives_at_extended(model, x, fd_step)
    gamma = christoffel_at(bundle)
    T = tangent_T(bundle.value)
    accel = np.append(bundle.jacobian @ bundle.value, 0.0)
    return accel + np.einsum("kij,i,j->k", gamma, T, T)


def derivatives_at_extended(model: VectorFieldModel, x, fd_step: float | None = None) -> DerivativeBundle:
    return _derivatives_unchecked(model, model.state(state_part(model, x)), fd_step)


# ---------------------------------------------------------------------------
# identity residuals (used by the verification suite and tests)
# ---------------------------------------------------------------------------

def metric_compatibility_defect(metric: MetricData, gamma: Array) -> Array:
    """(nabla_k g)_ij = d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il; zero for Levi-Civita."""
    g = metric.g
    nabla = (np.einsum("ijk->kij", metric.dg)
             - np.einsum("lki,lj->kij", gamma, g)
             - np.einsum("lkj,il->kij", gamma, g))
    return nabla


def riemann_symmetry_defects(curv: CurvatureData) -> dict[str, float]:
    """Max-abs violations of the algebraic Riemann symmetries.

    With Rm[i, j, k, l] = g(R(e_i, e_j)e_k, e_l):
    antisymmetry in (i, j) and in (k, l), pair exchange Rm[ijkl] = Rm[klij],
    and the first Bianchi identity R^l_ijk + R^l_jki + R^l_kij = 0.
    """
    rm = curv.riemann_lowered.transpose(1, 2, 3, 0)
    r = curv.riemann
    bianchi = r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2)
    return {
        "antisym_first_pair": float(np.max(np.abs(rm + rm.transpose(1, 0, 2, 3)))),
        "antisym_second_pair": float(np.max(np.abs(rm + rm.transpose(0, 1, 3, 2)))),
        "pair_exchange": float(np.max(np.abs(rm - rm.transpose(2, 3, 0, 1)))),
        "first_bianchi": float(np.max(np.abs(bianchi))),
    }
