"""Discrete-time peripheral analysis of unital channels.

For an irreducible unital Schwarz map the unit-circle spectrum is a finite
cyclic-group-like set: a finite subgroup of the torus, with one-dimensional
eigenspaces spanned by multiples of unitaries.  The report measures those
facts; the structural conclusions are asserted only when the caller
certifies irreducibility, because channels built from a generator are
Schwarz maps by construction while arbitrary superoperators are not.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import jsonio
from .gksl import HEISENBERG, GkslModel, Superoperator, unitality_residual, vectorize
from .operator_core import (
    DEFAULT_TOL,
    InternalInconsistencyError,
    Tolerances,
    ValidationError,
    hermitian_part,
    opnorm,
    unvec,
)

__all__ = ["PfReport", "channel_at", "pf_structure", "choi_matrix"]


@dataclass(frozen=True)
class PfReport:
    """Peripheral eigenvalue structure of a unital channel.

    The lists are aligned: one entry per distinct peripheral eigenvalue.
    ``unitary_residuals`` holds, per eigenvalue, the smallest distance
    ``||a^H a - I||`` over its eigenvectors after scaling to ``tr(a^H a) = n``.
    ``group_closure`` is certified only when every peripheral phase snaps to
    a rational multiple of 2 pi with denominator at most n^2.
    """

    peripheral_eigenvalues: tuple[complex, ...]
    eigenspace_dims: tuple[int, ...]
    unitary_residuals: tuple[float, ...]
    group_closure: bool
    choi_psd: bool

    def to_dict(self) -> dict:
        return {
            "peripheral_eigenvalues": [
                jsonio.complex_to_pair(z) for z in self.peripheral_eigenvalues
            ],
            "eigenspace_dims": list(self.eigenspace_dims),
            "unitary_residuals": list(self.unitary_residuals),
            "group_closure": self.group_closure,
            "choi_psd": self.choi_psd,
        }


def channel_at(model: GkslModel, t0: float, tol: Tolerances = DEFAULT_TOL) -> Superoperator:
    """Heisenberg map of the semigroup at a fixed positive time."""
    t0 = float(t0)
    if t0 <= 0.0:
        raise ValidationError("channel_at needs t0 > 0")
    generator = vectorize(model, HEISENBERG)
    channel = Superoperator(
        dim=model.dim,
        matrix=scipy.linalg.expm(t0 * generator.matrix),
        side=HEISENBERG,
    )
    residual = unitality_residual(channel)
    if residual > tol.eq * max(1.0, opnorm(channel.matrix)):
        raise InternalInconsistencyError(
            f"channel is not unital, residual {residual:.3e}"
        )
    return channel


def choi_matrix(superop: Superoperator) -> np.ndarray:
    """Choi matrix of the map; positive semidefinite iff completely positive."""
    n = superop.dim
    # with column stacking, C[(i, i'), (j, j')] = M[(i', j'), (i, j)]
    m = superop.matrix.reshape(n, n, n, n)
    return m.transpose(2, 0, 3, 1).reshape(n * n, n * n)


def _snap_phase(value: complex, n: int, atol: float) -> Fraction | None:
    phase = np.angle(value) / (2.0 * np.pi)
    candidate = Fraction(phase).limit_denominator(n * n)
    if abs(phase - float(candidate)) <= atol:
        return candidate % 1
    return None


def _closure_certified(values: list[complex], n: int, atol: float) -> bool:
    snapped = []
    for z in values:
        fraction = _snap_phase(z, n, atol)
        if fraction is None:
            return False
        snapped.append(fraction)
    phase_set = set(snapped)
    for a in phase_set:
        if (-a) % 1 not in phase_set:
            return False
        for b in phase_set:
            if (a + b) % 1 not in phase_set:
                return False
    return True


def pf_structure(
    channel: Superoperator,
    tol: Tolerances = DEFAULT_TOL,
    irreducible_certified: bool = False,
) -> PfReport:
    """Peripheral eigenvalue report for a unital channel.

    Extracts the eigenvalues of modulus at least ``1 - tol.spectral``,
    clusters them, and measures eigenspace dimensions, distance of
    normalized eigenvectors from unitaries and multiplicative closure of
    the snapped phase set.  With ``irreducible_certified`` the structure
    theorem is enforced: simple peripheral eigenvalues, unitary residuals
    within tolerance and a closed phase group, anything else raising
    :class:`InternalInconsistencyError`.  Without it the report is purely
    descriptive.
    """
    n = channel.dim
    matrix = channel.matrix
    residual = unitality_residual(channel)
    if residual > max(100.0 * tol.eq, 1e-8) * max(1.0, opnorm(matrix)):
        raise ValidationError(f"superoperator is not unital, residual {residual:.3e}")
    values, vectors = np.linalg.eig(matrix)
    moduli = np.abs(values)
    if moduli.max() > 1.0 + tol.spectral * max(1.0, opnorm(matrix)):
        raise ValidationError(
            f"spectrum leaves the closed unit disk (max modulus {moduli.max():.6f})"
        )
    peripheral_idx = np.nonzero(moduli >= 1.0 - tol.spectral)[0]
    if peripheral_idx.size == 0 or np.abs(values[peripheral_idx] - 1.0).min() > 1e-6:
        raise ValidationError("no eigenvalue near 1: not a unital channel")

    clusters = _cluster(values, peripheral_idx, radius=max(10.0 * tol.spectral, 1e-10))
    representatives = []
    dims = []
    multiplicities = []
    residuals = []
    for cluster in clusters:
        block = vectors[:, cluster]
        s = np.linalg.svd(block, compute_uv=False)
        rank = int(np.sum(s > max(tol.rank, 1e-8) * s.max()))
        representatives.append(complex(np.mean(values[cluster])))
        dims.append(rank)
        multiplicities.append(len(cluster))
        best = np.inf
        for idx in cluster:
            a = unvec(vectors[:, idx], n)
            a = a * np.sqrt(n) / np.linalg.norm(a)
            best = min(best, opnorm(a.conj().T @ a - np.eye(n)))
        residuals.append(float(best))

    closure = _closure_certified(representatives, n, atol=max(100.0 * tol.spectral, 1e-9))
    choi_psd = bool(
        np.linalg.eigvalsh(hermitian_part(choi_matrix(channel))).min()
        >= -max(100.0 * tol.psd, 1e-8)
    )

    if irreducible_certified:
        problems = []
        if any(d != 1 for d in dims) or any(m != 1 for m in multiplicities):
            problems.append(
                f"peripheral eigenvalues are not simple "
                f"(eigenspace dims {dims}, multiplicities {multiplicities})"
            )
        if any(r > tol.spectral for r in residuals):
            problems.append(f"unitary residuals {residuals} exceed tolerance")
        if not closure:
            problems.append("peripheral phases do not close under the group law")
        if problems:
            raise InternalInconsistencyError(
                "irreducible channel violates the peripheral structure theorem: "
                + "; ".join(problems)
            )
    return PfReport(
        peripheral_eigenvalues=tuple(representatives),
        eigenspace_dims=tuple(dims),
        unitary_residuals=tuple(residuals),
        group_closure=closure,
        choi_psd=choi_psd,
    )


def _cluster(values: np.ndarray, indices: np.ndarray, radius: float) -> list[list[int]]:
    remaining = sorted(indices, key=lambda i: (-values[i].real, -values[i].imag))
    clusters = []
    while remaining:
        head = remaining[0]
        near = [i for i in remaining if abs(values[i] - values[head]) <= radius]
        remaining = [i for i in remaining if i not in near]
        clusters.append(near)
    return clusters
