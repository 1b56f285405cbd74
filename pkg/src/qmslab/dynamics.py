"""Numerical semigroup evolution, Cesaro means and the support oracle.

Evolution goes through the exact matrix exponential of the vectorized
generator.  The trace-distance convention everywhere is the raw trace norm
of the difference, without a 1/2 factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .gksl import HEISENBERG, SCHRODINGER, GkslModel, vectorize
from .operator_core import (
    DEFAULT_TOL,
    NumericalFailureError,
    Subspace,
    Tolerances,
    ValidationError,
    as_complex_matrix,
    hermitian_part,
    opnorm,
    trace_norm,
    unvec,
    validate_density,
    vec,
)

__all__ = [
    "RelaxationProfile",
    "evolve_state",
    "evolve_observable",
    "cesaro_mean",
    "cesaro_mean_observable",
    "relaxation_profile",
    "numerical_support_oracle",
    "contraction_semigroup",
]


@dataclass(frozen=True)
class RelaxationProfile:
    """Trace-norm distances to a target density along a time grid."""

    times: tuple[float, ...]
    distances: tuple[float, ...]
    target: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) != len(self.distances):
            raise ValidationError("times and distances must have the same length")
        if any(d < 0.0 for d in self.distances):
            raise ValidationError("distances must be non-negative")


def _check_time(t: float) -> float:
    t = float(t)
    if t < 0.0:
        raise ValidationError(f"evolution time must be non-negative, got {t}")
    return t


def _propagate(model: GkslModel, operand: np.ndarray, t: float, side: str) -> np.ndarray:
    matrix = vectorize(model, side).matrix
    return unvec(scipy.linalg.expm(t * matrix) @ vec(operand), model.dim)


def _validate_evolved_density(out: np.ndarray, tol: Tolerances) -> np.ndarray:
    trace_dev = abs(np.trace(out) - 1.0)
    if trace_dev > tol.trace:
        raise NumericalFailureError(
            f"evolved state trace deviates from 1 by {trace_dev:.3e}"
        )
    eigenvalues = np.linalg.eigvalsh(hermitian_part(out))
    if eigenvalues.min() < -tol.psd:
        raise NumericalFailureError(
            f"evolved state has eigenvalue {eigenvalues.min():.3e} below the psd floor"
        )
    return out


def evolve_state(model: GkslModel, eta, t: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Predual evolution of a density over time ``t >= 0``.

    The result is checked to still be a density (trace within ``tol.trace``
    of one, spectrum above the psd floor); a violation raises
    :class:`NumericalFailureError` because exact evolution preserves both.
    """
    t = _check_time(t)
    eta = validate_density(eta, tol)
    out = _propagate(model, eta, t, SCHRODINGER)
    return _validate_evolved_density(out, tol)


def evolve_observable(model: GkslModel, x, t: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Heisenberg evolution of an observable over time ``t >= 0``."""
    t = _check_time(t)
    x = as_complex_matrix(x)
    return _propagate(model, x, t, HEISENBERG)


def _default_steps(model: GkslModel, t: float, steps: int | None) -> int:
    if steps is not None:
        steps = int(steps)
        if steps < 2:
            raise ValidationError("cesaro_mean needs at least 2 steps")
        return steps
    generator_norm = opnorm(vectorize(model, HEISENBERG).matrix)
    return max(64, int(np.ceil(8.0 * t * generator_norm)))


def _cesaro(matrix: np.ndarray, operand: np.ndarray, t: float, steps: int, n: int) -> np.ndarray:
    # trapezoidal rule on a uniform grid; the integrand is smooth with
    # derivative bounded by the generator norm
    h = t / steps
    step = scipy.linalg.expm(h * matrix)
    current = vec(operand)
    acc = 0.5 * current
    for k in range(1, steps):
        current = step @ current
        acc = acc + current
    current = step @ current
    acc = acc + 0.5 * current
    return unvec(acc / steps, n)


def cesaro_mean(
    model: GkslModel,
    eta,
    t: float,
    steps: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Time average ``(1/t) integral_0^t T_*s(eta) ds`` of the state evolution.

    Parameters
    ----------
    model : GkslModel
    eta : array_like
        Initial density.
    t : float
        Averaging horizon, strictly positive.
    steps : int, optional
        Trapezoid panels; defaults to ``max(64, 8 t ||gen||)``.
    """
    t = float(t)
    if t <= 0.0:
        raise ValidationError("cesaro_mean needs t > 0")
    eta = validate_density(eta, tol)
    steps = _default_steps(model, t, steps)
    out = _cesaro(vectorize(model, SCHRODINGER).matrix, eta, t, steps, model.dim)
    return _validate_evolved_density(out, tol)


def cesaro_mean_observable(
    model: GkslModel,
    x,
    t: float,
    steps: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Heisenberg-side time average; fixed points are reproduced exactly."""
    t = float(t)
    if t <= 0.0:
        raise ValidationError("cesaro_mean_observable needs t > 0")
    x = as_complex_matrix(x)
    steps = _default_steps(model, t, steps)
    return _cesaro(vectorize(model, HEISENBERG).matrix, x, t, steps, model.dim)


def relaxation_profile(
    model: GkslModel,
    eta,
    times: Sequence[float],
    target=None,
    tol: Tolerances = DEFAULT_TOL,
) -> RelaxationProfile:
    """Trace-norm distance of the evolved state to a target along a grid.

    ``times`` must be sorted and non-negative.  Without an explicit target
    the extracted invariant density is used; if none can be extracted the
    caller must supply one.
    """
    grid = [float(s) for s in times]
    if any(s < 0.0 for s in grid):
        raise ValidationError("relaxation_profile times must be non-negative")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValidationError("relaxation_profile times must be sorted")
    eta = validate_density(eta, tol)
    if target is None:
        from .analysis import invariant_density_space

        _, extracted = invariant_density_space(model, tol)
        if extracted is None:
            raise ValidationError(
                "no invariant density could be extracted and no target was given"
            )
        target = extracted
    else:
        target = validate_density(target, tol)
    distances = []
    matrix = vectorize(model, SCHRODINGER).matrix
    for s in grid:
        evolved = unvec(scipy.linalg.expm(s * matrix) @ vec(eta), model.dim)
        distances.append(trace_norm(evolved - target))
    return RelaxationProfile(times=tuple(grid), distances=tuple(distances), target=target)


def numerical_support_oracle(
    model: GkslModel,
    psi,
    t: float = 0.1,
    tol: Tolerances = DEFAULT_TOL,
) -> Subspace:
    """Support of the evolved pure state, measured spectrally.

    Evolves ``|psi><psi|`` to time ``t > 0``, eigendecomposes, and keeps the
    eigenvectors above the adaptive cutoff ``tol.rank * lambda_max``.  Keep
    ``t`` small (default 0.1): strictly positive eigenvalues decay
    exponentially and would eventually dip below any fixed cutoff.
    """
    t = float(t)
    if t <= 0.0:
        raise ValidationError("the support oracle needs t > 0")
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValidationError("psi must be a nonzero vector")
    psi = psi / norm
    state = np.outer(psi, psi.conj())
    evolved = evolve_state(model, state, t, tol)
    eigenvalues, vectors = np.linalg.eigh(hermitian_part(evolved))
    top = eigenvalues.max()
    if top <= 0.0:
        raise NumericalFailureError("evolved pure state has no positive spectrum")
    keep = eigenvalues > tol.rank * top
    return Subspace(dim_ambient=model.dim, frame=vectors[:, keep])


def contraction_semigroup(model: GkslModel, t: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The semigroup ``exp(t G)`` generated by the drift; a contraction."""
    t = _check_time(t)
    out = scipy.linalg.expm(t * model.drift)
    norm = opnorm(out)
    if norm > 1.0 + max(tol.eq * 100.0, 1e-10):
        raise NumericalFailureError(
            f"drift semigroup has operator norm {norm:.12f} > 1"
        )
    return out
