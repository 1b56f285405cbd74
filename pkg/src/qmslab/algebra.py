"""Linear-algebra engine for operator algebras.

Everything here works on the vectorized picture: an operator subspace is an
orthonormal set of columns in C^(n^2) under the Hilbert-Schmidt inner
product.  Span closures accept a new direction only when its residual
against the current basis exceeds a relative rank cutoff, processed in a
fixed order so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operator_core import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    ValidationError,
    as_complex_matrix,
    unvec,
    vec,
)

__all__ = [
    "OperatorSpace",
    "generated_algebra",
    "commutant",
    "orbit_subspace",
    "iterated_commutator_span",
    "space_contains",
    "space_equal",
]


def _extend_orthonormal(
    basis: np.ndarray,
    candidates: np.ndarray,
    threshold: float,
) -> np.ndarray:
    """Grow an orthonormal column set by the candidates, in order.

    A batched projection filters out candidates already inside the span;
    survivors go through modified Gram-Schmidt (two passes, which is enough
    to restore orthogonality) one at a time.
    """
    if candidates.size == 0:
        return basis
    if basis.shape[1]:
        residual = candidates - basis @ (basis.conj().T @ candidates)
    else:
        residual = candidates
    norms = np.linalg.norm(residual, axis=0)
    survivors = np.nonzero(norms > threshold)[0]
    cols = [basis[:, j] for j in range(basis.shape[1])]
    for idx in survivors:
        r = candidates[:, idx]
        for _ in range(2):
            for c in cols:
                r = r - c * np.vdot(c, r)
        norm = np.linalg.norm(r)
        if norm > threshold:
            cols.append(r / norm)
    if not cols:
        return np.zeros((candidates.shape[0], 0), dtype=complex)
    return np.column_stack(cols)


@dataclass(frozen=True)
class OperatorSpace:
    """Hilbert-Schmidt-orthonormal basis of a subspace of the n x n matrices.

    The three structural flags are measured on the basis, never assumed.
    """

    dim_ambient: int
    basis: tuple[np.ndarray, ...]
    contains_identity: bool
    self_adjoint: bool
    multiplicatively_closed: bool

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_columns(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((self.dim_ambient**2, 0), dtype=complex)
        return np.column_stack([vec(b) for b in self.basis])

    def projection_residual(self, x) -> float:
        """Distance of ``x`` from the span, relative to ``||x||_HS``."""
        v = vec(as_complex_matrix(x))
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return 0.0
        cols = self.basis_columns()
        residual = v - cols @ (cols.conj().T @ v)
        return float(np.linalg.norm(residual) / norm)

    def contains(self, x, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.projection_residual(x) <= max(tol.eq, 1e-12) * 100.0

    @classmethod
    def from_columns(
        cls, columns: np.ndarray, dim_ambient: int, tol: Tolerances = DEFAULT_TOL
    ) -> "OperatorSpace":
        mats = tuple(unvec(columns[:, j], dim_ambient) for j in range(columns.shape[1]))
        return cls(
            dim_ambient=dim_ambient,
            basis=mats,
            contains_identity=_span_contains(columns, vec(np.eye(dim_ambient))),
            self_adjoint=_span_self_adjoint(columns, dim_ambient),
            multiplicatively_closed=_span_closed(columns, dim_ambient),
        )


def _span_contains(columns: np.ndarray, v: np.ndarray, rtol: float = 1e-8) -> bool:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return True
    if columns.shape[1] == 0:
        return False
    residual = v - columns @ (columns.conj().T @ v)
    return float(np.linalg.norm(residual)) <= rtol * norm


def _span_self_adjoint(columns: np.ndarray, n: int) -> bool:
    for j in range(columns.shape[1]):
        adj = vec(unvec(columns[:, j], n).conj().T)
        if not _span_contains(columns, adj):
            return False
    return True


def _span_closed(columns: np.ndarray, n: int) -> bool:
    k = columns.shape[1]
    for i in range(k):
        a = unvec(columns[:, i], n)
        for j in range(k):
            product = vec(a @ unvec(columns[:, j], n))
            if not _span_contains(columns, product):
                return False
    return True


def generated_algebra(
    generators: Sequence,
    include_identity: bool = True,
    tol: Tolerances = DEFAULT_TOL,
    dim: int | None = None,
) -> OperatorSpace:
    """Smallest multiplicatively closed span containing the generators.

    Iterates ``V <- span(V + V.V)`` with rank-revealing orthonormalization
    until the dimension stabilizes; at most n^2 rounds can add anything.
    Each generator is normalized first, which leaves the span unchanged and
    keeps the acceptance cutoff scale-free.

    An empty generator list without the identity yields the zero space.
    """
    mats = [as_complex_matrix(m) for m in generators]
    if mats:
        n = mats[0].shape[0]
    elif dim is not None:
        n = dim
    else:
        raise ValidationError("generated_algebra with no generators needs an explicit dim")
    for m in mats:
        if m.shape != (n, n):
            raise ValidationError("generated_algebra: matrices have mixed dimensions")
    seeds = []
    if include_identity:
        seeds.append(np.eye(n, dtype=complex))
    for m in mats:
        norm = np.linalg.norm(m)
        if norm > 0.0:
            seeds.append(m / norm)
    threshold = tol.rank * max(1.0, float(n))
    basis = np.zeros((n * n, 0), dtype=complex)
    if seeds:
        basis = _extend_orthonormal(basis, np.column_stack([vec(s) for s in seeds]), threshold)
    while basis.shape[1]:
        k = basis.shape[1]
        mats_now = [unvec(basis[:, j], n) for j in range(k)]
        left = np.stack(mats_now)
        products = np.einsum("aij,bjk->abik", left, left).reshape(k * k, n, n)
        # column-stacked vec of each product, batched
        candidates = products.transpose(0, 2, 1).reshape(k * k, n * n).T
        grown = _extend_orthonormal(basis, candidates, threshold)
        if grown.shape[1] == k:
            break
        basis = grown
        if basis.shape[1] >= n * n:
            break
    return OperatorSpace.from_columns(basis, n, tol)


def commutant(matrices: Sequence, tol: Tolerances = DEFAULT_TOL, dim: int | None = None) -> OperatorSpace:
    """All operators commuting with every given matrix.

    Kernel of the stacked linear map ``x -> ([x, A_1], ..., [x, A_m])``,
    computed from one SVD of the ``(m n^2) x n^2`` stack of
    ``I kron A_i - A_i^T kron I`` blocks.  Always contains the identity and
    is an algebra.
    """
    mats = [as_complex_matrix(m) for m in matrices]
    if mats:
        n = mats[0].shape[0]
    elif dim is not None:
        n = dim
    else:
        raise ValidationError("commutant of an empty set needs an explicit dim")
    for m in mats:
        if m.shape != (n, n):
            raise ValidationError("commutant: matrices have mixed dimensions")
    eye = np.eye(n, dtype=complex)
    if not mats:
        blocks = np.zeros((1, n * n), dtype=complex)
    else:
        blocks = np.vstack([np.kron(eye, a) - np.kron(a.T, eye) for a in mats])
    u, s, vh = np.linalg.svd(blocks)
    top = s.max() if s.size else 0.0
    rank = int(np.sum(s > tol.rank * max(top, 1.0)))
    kernel = vh[rank:].conj().T
    return OperatorSpace.from_columns(kernel, n, tol)


def orbit_subspace(matrices: Sequence, vector, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing ``vector`` and invariant under the matrices.

    Iterates ``W <- span(W + A W)`` until stable.  The matrices are
    normalized per element (invariance is scale-free).
    """
    v = np.asarray(vector, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValidationError("orbit_subspace needs a nonzero start vector")
    n = v.size
    mats = []
    for m in matrices:
        m = as_complex_matrix(m)
        if m.shape != (n, n):
            raise ValidationError("orbit_subspace: matrix dimension does not match vector")
        mnorm = np.linalg.norm(m, 2)
        if mnorm > 0.0:
            mats.append(m / mnorm)
    threshold = tol.rank * max(1.0, float(n))
    frame = (v / norm).reshape(n, 1)
    while frame.shape[1] < n:
        k = frame.shape[1]
        if not mats:
            break
        candidates = np.column_stack([m @ frame for m in mats])
        frame = _extend_orthonormal(frame, candidates, threshold)
        if frame.shape[1] == k:
            break
    return Subspace(dim_ambient=n, frame=frame)


def iterated_commutator_span(
    anchor, seeds: Sequence, tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """Spanning set for all iterated commutators of the anchor with the seeds.

    Returns an orthonormal (Hilbert-Schmidt) basis of
    ``span{ ad_A^m(X) : X in seeds, m >= 0 }`` where ``ad_A = [A, .]``.
    The commutator map acts on an n^2-dimensional space, so the Krylov
    iteration stabilizes in at most n^2 rounds.
    """
    seed_mats = [as_complex_matrix(s) for s in seeds]
    if not seed_mats:
        return []
    A = as_complex_matrix(anchor)
    n = A.shape[0]
    for s in seed_mats:
        if s.shape != (n, n):
            raise ValidationError("iterated_commutator_span: mixed dimensions")
    threshold = tol.rank * max(1.0, float(n))
    basis = np.zeros((n * n, 0), dtype=complex)
    normalized = []
    for s in seed_mats:
        norm = np.linalg.norm(s)
        if norm > 0.0:
            normalized.append(s / norm)
    if not normalized:
        return []
    basis = _extend_orthonormal(
        basis, np.column_stack([vec(s) for s in normalized]), threshold
    )
    anorm = np.linalg.norm(A, 2)
    scaled_anchor = A / anorm if anorm > 0.0 else A
    while basis.shape[1] < n * n:
        k = basis.shape[1]
        brackets = []
        for j in range(k):
            x = unvec(basis[:, j], n)
            brackets.append(vec(scaled_anchor @ x - x @ scaled_anchor))
        basis = _extend_orthonormal(basis, np.column_stack(brackets), threshold)
        if basis.shape[1] == k:
            break
    return [unvec(basis[:, j], n) for j in range(basis.shape[1])]


def space_contains(space: OperatorSpace, matrices: Sequence, rtol: float = 1e-8) -> bool:
    """True when every matrix lies in the span (relative residual cutoff)."""
    cols = space.basis_columns()
    for m in matrices:
        if not _span_contains(cols, vec(as_complex_matrix(m)), rtol):
            return False
    return True


def space_equal(a: OperatorSpace, b: OperatorSpace, rtol: float = 1e-8) -> bool:
    """Span equality via matching dimensions and mutual containment."""
    if a.dim != b.dim:
        return False
    return space_contains(a, b.basis, rtol) and space_contains(b, a.basis, rtol)
