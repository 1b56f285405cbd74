"""Dense complex-matrix primitives with quantum-state semantics.

Conventions shared by the whole package:

* operators are dense square ``numpy`` arrays with ``complex`` dtype;
* ``opnorm`` is the operator (spectral) norm, ``trace_norm`` the sum of
  singular values, ``hs_inner(a, b) = tr(a^H b)`` the Hilbert-Schmidt
  inner product;
* ``vec``/``unvec`` use column stacking, so ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QmsError",
    "ValidationError",
    "InternalInconsistencyError",
    "NumericalFailureError",
    "Tolerances",
    "DEFAULT_TOL",
    "Subspace",
    "as_complex_matrix",
    "opnorm",
    "hermitian_part",
    "hermiticity_residual",
    "is_hermitian",
    "is_psd",
    "trace_norm",
    "hs_inner",
    "hs_norm",
    "support_projection",
    "corner_vanishing",
    "validate_density",
    "validate_projection",
    "vec",
    "unvec",
]


class QmsError(Exception):
    """Base class for all package errors."""


class ValidationError(QmsError):
    """Invalid input data or a violated precondition."""


class InternalInconsistencyError(QmsError):
    """Two mathematically equivalent criteria disagreed beyond tolerance."""


class NumericalFailureError(QmsError):
    """A numerical procedure broke down and no verdict can be trusted."""


_ENV_PREFIX = "QMS_TOL_"
_TOL_FIELDS = ("rank", "psd", "trace", "eq", "spectral")


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs used by every decision procedure.

    rank
        Relative singular-value / eigenvalue cutoff for numerical rank.
    psd
        Eigenvalue floor below which a Hermitian matrix counts as
        non-positive.
    trace
        Allowed deviation of a density's trace from one.
    eq
        Operator-norm cutoff for matrix equality checks.
    spectral
        Real-part cutoff for membership in the peripheral spectrum.
    """

    rank: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-9
    eq: float = 1e-10
    spectral: float = 1e-8

    def __post_init__(self) -> None:
        for name in _TOL_FIELDS:
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValidationError(
                    f"tolerance '{name}' must lie in (0, 1), got {value!r}"
                )

    @classmethod
    def from_env(cls, **overrides: float | None) -> "Tolerances":
        """Read ``QMS_TOL_RANK`` etc. from the environment, then apply overrides."""
        values: dict[str, float] = {}
        for name in _TOL_FIELDS:
            raw = os.environ.get(_ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = float(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


DEFAULT_TOL = Tolerances()


def as_complex_matrix(x) -> np.ndarray:
    """Coerce to a finite square complex array (copy only when needed)."""
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValidationError("matrix contains NaN or Inf entries")
    return a


def opnorm(x: np.ndarray) -> float:
    """Operator (spectral) norm."""
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def hermiticity_residual(x: np.ndarray) -> float:
    return opnorm(x - x.conj().T)


def is_hermitian(x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = as_complex_matrix(x)
    return hermiticity_residual(x) <= tol.eq * max(1.0, opnorm(x))


def is_psd(x, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``x`` is Hermitian and its spectrum sits above the psd floor.

    The floor is relative, ``-tol.psd * max(1, ||x||)``, so the verdict is
    stable under overall scaling of O(1)-sized operators.  The matrix is
    symmetrized before the eigensolve once Hermiticity holds, which removes
    round-off asymmetry.
    """
    x = as_complex_matrix(x)
    scale = max(1.0, opnorm(x))
    if hermiticity_residual(x) > tol.eq * scale:
        return False
    eigenvalues = np.linalg.eigvalsh(hermitian_part(x))
    return bool(eigenvalues.min() >= -tol.psd * scale)


def trace_norm(x) -> float:
    """Sum of singular values; equals 1 for any density."""
    x = as_complex_matrix(x)
    return float(np.linalg.svd(x, compute_uv=False).sum())


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``tr(a^H b)``."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    a = np.asarray(a, dtype=complex)
    return float(np.linalg.norm(a))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if n is None:
        n = int(round(v.size**0.5))
    if n * n != v.size:
        raise ValidationError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((n, n), order="F")


def validate_density(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check Hermiticity, positivity floor and unit trace; return the array."""
    rho = as_complex_matrix(rho)
    if hermiticity_residual(rho) > tol.eq * max(1.0, opnorm(rho)):
        raise ValidationError(
            f"density is not Hermitian, residual {hermiticity_residual(rho):.3e}"
        )
    eigenvalues = np.linalg.eigvalsh(hermitian_part(rho))
    if eigenvalues.min() < -tol.psd:
        raise ValidationError(
            f"density has eigenvalue {eigenvalues.min():.3e} below the psd floor"
        )
    trace_dev = abs(np.trace(rho) - 1.0)
    if trace_dev > tol.trace:
        raise ValidationError(f"density trace deviates from 1 by {trace_dev:.3e}")
    return rho


def validate_projection(p, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check ``p = p^H = p^2`` within tolerance; return the array."""
    p = as_complex_matrix(p)
    if hermiticity_residual(p) > tol.eq * max(1.0, opnorm(p)):
        raise ValidationError("projection is not Hermitian")
    if opnorm(p @ p - p) > tol.eq * max(1.0, opnorm(p)):
        raise ValidationError("matrix is not idempotent")
    return p


def support_projection(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto the numerical range of a positive matrix.

    Eigenvectors with eigenvalue above ``tol.rank`` times the largest
    eigenvalue are kept, so the rank equals the numerical rank of ``rho``.
    """
    rho = as_complex_matrix(rho)
    if hermiticity_residual(rho) > tol.eq * max(1.0, opnorm(rho)):
        raise ValidationError("support projection needs a Hermitian input")
    eigenvalues, vectors = np.linalg.eigh(hermitian_part(rho))
    top = eigenvalues.max() if eigenvalues.size else 0.0
    if top <= 0.0:
        raise ValidationError("cannot take the support of a non-positive matrix")
    keep = eigenvalues > tol.rank * top
    frame = vectors[:, keep]
    return frame @ frame.conj().T


def corner_vanishing(x, p, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Decide ``p x p = 0`` for positive ``x`` and verify the block consequence.

    For positive ``x``, a vanishing corner forces the whole row and column,
    i.e. ``x = (1-p) x (1-p)``.  When the corner vanishes numerically but the
    consequence fails, something is broken and an
    :class:`InternalInconsistencyError` is raised instead of a verdict.
    """
    x = as_complex_matrix(x)
    p = validate_projection(p, tol)
    if not is_psd(x, tol):
        raise ValidationError("corner_vanishing requires a positive semidefinite input")
    scale = max(1.0, opnorm(x))
    if opnorm(p @ x @ p) > tol.eq * scale:
        return False
    complement = np.eye(x.shape[0], dtype=complex) - p
    residual = opnorm(x - complement @ x @ complement)
    if residual > 10.0 * tol.eq * scale:
        raise InternalInconsistencyError(
            f"corner vanishes but x != (1-p)x(1-p), residual {residual:.3e}"
        )
    return True


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^n stored as an orthonormal frame (n x k columns)."""

    dim_ambient: int
    frame: np.ndarray

    def __post_init__(self) -> None:
        frame = np.asarray(self.frame, dtype=complex)
        if frame.ndim != 2 or frame.shape[0] != self.dim_ambient:
            raise ValidationError(
                f"frame shape {frame.shape} does not match ambient dimension {self.dim_ambient}"
            )
        object.__setattr__(self, "frame", frame)
        k = frame.shape[1]
        if k:
            gram = frame.conj().T @ frame
            if opnorm(gram - np.eye(k)) > 1e-8:
                raise ValidationError("frame columns are not orthonormal")

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def contains(self, vector, tol: Tolerances = DEFAULT_TOL) -> bool:
        v = np.asarray(vector, dtype=complex).reshape(-1)
        residual = v - self.frame @ (self.frame.conj().T @ v)
        return float(np.linalg.norm(residual)) <= tol.eq * max(1.0, float(np.linalg.norm(v)))

    @classmethod
    def from_span(cls, vectors, dim_ambient: int, tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Orthonormalize an arbitrary spanning set with a relative rank cutoff."""
        cols = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        if any(c.size != dim_ambient for c in cols):
            raise ValidationError("spanning vectors have inconsistent length")
        if not cols:
            return cls(dim_ambient, np.zeros((dim_ambient, 0), dtype=complex))
        stacked = np.column_stack(cols)
        u, s, _ = np.linalg.svd(stacked, full_matrices=False)
        top = s.max() if s.size else 0.0
        keep = s > tol.rank * max(top, 1.0)
        return cls(dim_ambient, u[:, keep])
