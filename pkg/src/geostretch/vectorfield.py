"""Autonomous vector fields x' = f(x) with derivatives up to second order.

Built-in models carry closed-form Jacobians and Hessians.  Arbitrary
user callables fall back to central finite differences.  Fields are
assumed to be at least C^2, since curvature needs second derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NonFiniteError

Array = np.ndarray

# cube root of machine epsilon, floored at 1e-6
DEFAULT_FD_STEP = max(float(np.finfo(float).eps) ** (1.0 / 3.0), 1e-6)
HESSIAN_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class VectorFieldModel:
    """An n-dimensional smooth vector field.

    ``jacobian`` and ``hessian`` are optional closed forms; when absent the
    corresponding derivative is taken by central differences with a step of
    ``fd_step * max(1, |x_k|)`` along coordinate k.
    """

    dimension: int
    evaluator: Callable[[Array], Array]
    jacobian: Callable[[Array], Array] | None = None
    hessian: Callable[[Array], Array] | None = None
    fd_step: float = DEFAULT_FD_STEP
    domain_guard: Callable[[Array], bool] | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension!r}")
        if not (self.fd_step > 0 and math.isfinite(self.fd_step)):
            raise ValueError(f"fd_step must be positive, got {self.fd_step!r}")

    @property
    def jacobian_mode(self) -> str:
        return "analytic" if self.jacobian is not None else "finite-difference"

    @property
    def hessian_mode(self) -> str:
        return "analytic" if self.hessian is not None else "finite-difference"

    def with_fd_step(self, fd_step: float) -> VectorFieldModel:
        """Copy of the model using another finite-difference step."""
        return VectorFieldModel(
            self.dimension, self.evaluator, self.jacobian, self.hessian,
            fd_step, self.domain_guard, self.name, dict(self.params),
        )

    def finite_difference_twin(self) -> VectorFieldModel:
        """Copy of the model that ignores its closed-form derivatives."""
        return VectorFieldModel(
            self.dimension, self.evaluator, None, None,
            self.fd_step, self.domain_guard, self.name, dict(self.params),
        )

    def in_domain(self, x: Array) -> bool:
        return self.domain_guard is None or bool(self.domain_guard(x))

    def state(self, x) -> Array:
        """Validate ``x`` as a state point of this model and return it as a float array."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a state of length {self.dimension}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"state has non-finite components: {x}")
        if not self.in_domain(x):
            raise DomainError(f"state {x.tolist()} is outside the domain of model {self.name!r}")
        return x

    def value(self, x: Array) -> Array:
        fx = np.asarray(self.evaluator(x), dtype=float)
        if fx.shape != (self.dimension,):
            raise ValueError(f"evaluator returned shape {fx.shape}, expected ({self.dimension},)")
        if not np.all(np.isfinite(fx)):
            raise NonFiniteError(f"non-finite field value {fx} at {x}")
        return fx

    def __call__(self, x) -> Array:
        return self.value(self.state(x))


@dataclass(frozen=True)
class DerivativeBundle:
    """f(x), J[i, j] = df_i/dx_j and H[i, j, k] = d2f_i/dx_j dx_k at one point."""

    point: Array
    value: Array
    jacobian: Array
    hessian: Array


@dataclass(frozen=True)
class Trajectory:
    times: Array
    points: Array  # shape (len(times), n)

    def __len__(self) -> int:
        return len(self.times)


def _steps(model: VectorFieldModel, x: Array, fd_step: float | None) -> Array:
    h = model.fd_step if fd_step is None else fd_step
    return h * np.maximum(1.0, np.abs(x))


def fd_jacobian(model: VectorFieldModel, x: Array, fd_step: float | None = None) -> Array:
    """Two-point central difference Jacobian, column k from perturbing x_k."""
    n = model.dimension
    h = _steps(model, x, fd_step)
    jac = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        jac[:, k] = (model.value(x + e) - model.value(x - e)) / (2.0 * h[k])
    return jac


def fd_hessian(model: VectorFieldModel, x: Array, fd_step: float | None = None) -> Array:
    """Central second-difference Hessian, symmetrized over the last two indices.

    Differentiates the closed-form Jacobian when the model has one,
    otherwise applies the usual 3-point / 4-point stencils to f itself.
    """
    n = model.dimension
    h = _steps(model, x, fd_step)
    hess = np.empty((n, n, n))
    if model.jacobian is not None:
        for k in range(n):
            e = np.zeros(n)
            e[k] = h[k]
            jp = np.asarray(model.jacobian(x + e), dtype=float)
            jm = np.asarray(model.jacobian(x - e), dtype=float)
            hess[:, :, k] = (jp - jm) / (2.0 * h[k])
    else:
        f0 = model.value(x)
        for j in range(n):
            ej = np.zeros(n)
            ej[j] = h[j]
            hess[:, j, j] = (model.value(x + ej) - 2.0 * f0 + model.value(x - ej)) / h[j] ** 2
            for k in range(j + 1, n):
                ek = np.zeros(n)
                ek[k] = h[k]
                d = (model.value(x + ej + ek) - model.value(x + ej - ek)
                     - model.value(x - ej + ek) + model.value(x - ej - ek)) / (4.0 * h[j] * h[k])
                hess[:, j, k] = d
                hess[:, k, j] = d
    return 0.5 * (hess + hess.transpose(0, 2, 1))


def derivatives(model: VectorFieldModel, x, fd_step: float | None = None) -> DerivativeBundle:
    """Value, Jacobian and Hessian of ``model`` at ``x``."""
    return _derivatives_unchecked(model, model.state(x), fd_step)


def _derivatives_unchecked(model: VectorFieldModel, x: Array, fd_step: float | None) -> DerivativeBundle:
    # no domain guard: used for stencil points that may sit just outside the domain
    fx = model.value(x)
    if model.jacobian is not None:
        jac = np.asarray(model.jacobian(x), dtype=float)
    else:
        jac = fd_jacobian(model, x, fd_step)
    if model.hessian is not None:
        hess = np.asarray(model.hessian(x), dtype=float)
    else:
        hess = fd_hessian(model, x, fd_step)
    n = model.dimension
    if jac.shape != (n, n) or hess.shape != (n, n, n):
        raise ValueError(f"derivative shapes {jac.shape}, {hess.shape} do not match dimension {n}")
    if not (np.all(np.isfinite(jac)) and np.all(np.isfinite(hess))):
        raise NonFiniteError(f"non-finite derivatives at {x}")
    return DerivativeBundle(point=x, value=fx, jacobian=jac, hessian=hess)


def integrate(model: VectorFieldModel, x0, t_end: float, dt: float = 1e-3) -> Trajectory:
    """Classical fixed-step RK4 from t=0 to (approximately) ``t_end``.

    The number of steps is ``round(t_end / dt)`` (at least one), so the final
    time lies within ``dt / 2`` of ``t_end``.  Raises DomainError carrying
    ``last_valid_time`` if the solution leaves the domain.
    """
    if not (dt > 0 and t_end > 0):
        raise ValueError("t_end and dt must be positive")
    if dt > t_end * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds t_end={t_end}")
    x = model.state(x0)
    n_steps = max(1, int(round(t_end / dt)))
    times = np.arange(n_steps + 1) * dt
    points = np.empty((n_steps + 1, model.dimension))
    points[0] = x
    f = model.value
    for i in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"state became non-finite after t={times[i]}")
        if not model.in_domain(x):
            raise DomainError(
                f"trajectory left the domain of {model.name!r} after t={times[i]}",
                last_valid_time=float(times[i]),
            )
        points[i + 1] = x
    return Trajectory(times=times, points=points)


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def make_davis_skodje(gamma: float, fd_step: float = DEFAULT_FD_STEP) -> VectorFieldModel:
    """Davis-Skodje system, restricted to x > 0.

        x' = -x
        y' = -gamma*y + ((gamma-1)*x + gamma*x**2) / (1+x)**2

    Its slow invariant manifold is the graph y = x / (1 + x).
    """
    gamma = float(gamma)
    if not gamma > 1:
        raise ValueError(f"Davis-Skodje requires gamma > 1, got {gamma}")

    def f(s):
        x, y = s
        return np.array([-x, -gamma * y + ((gamma - 1) * x + gamma * x * x) / (1 + x) ** 2])

    def jac(s):
        x, _ = s
        dq = ((gamma + 1) * x + gamma - 1) / (1 + x) ** 3
        return np.array([[-1.0, 0.0], [dq, -gamma]])

    def hess(s):
        x, _ = s
        h = np.zeros((2, 2, 2))
        h[1, 0, 0] = -2.0 * ((gamma + 1) * x + gamma - 2) / (1 + x) ** 4
        return h

    return VectorFieldModel(
        dimension=2, evaluator=f, jacobian=jac, hessian=hess, fd_step=fd_step,
        domain_guard=lambda s: s[0] > 0, name="davis-skodje", params={"gamma": gamma},
    )


def davis_skodje_sim(x):
    """Slow invariant manifold of the Davis-Skodje system, y = x / (1 + x)."""
    return x / (1.0 + x)


def make_linear(A, fd_step: float = DEFAULT_FD_STEP) -> VectorFieldModel:
    """f(x) = A x."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    zero_h = np.zeros((n, n, n))
    return VectorFieldModel(
        dimension=n, evaluator=lambda x: A @ x, jacobian=lambda x: A.copy(),
        hessian=lambda x: zero_h.copy(), fd_step=fd_step, name="linear",
        params={"A": A.tolist()},
    )


def make_constant(c, fd_step: float = DEFAULT_FD_STEP) -> VectorFieldModel:
    """f(x) = c everywhere; the extended metric is then flat."""
    c = np.array(c, dtype=float).ravel()
    n = c.size
    return VectorFieldModel(
        dimension=n, evaluator=lambda x: c.copy(), jacobian=lambda x: np.zeros((n, n)),
        hessian=lambda x: np.zeros((n, n, n)), fd_step=fd_step, name="constant",
        params={"c": c.tolist()},
    )
