"""Canonical fixtures and seeded random model generation.

Fixture verdicts (documented in the README table):

* ``AD2``  amplitude damping on a qubit, jump ``|0><1|``; reducible, unique
  non-faithful invariant density ``|0><0|``.
* ``DP2``  dephasing on a qubit, jump ``sigma_z``; reducible, invariant
  kernel of dimension 2.
* ``U2``   closed precession, ``H = sigma_z`` with no jumps; reducible,
  reversible subalgebra is everything.
* ``BD3``/``BDn`` truncated birth-death chain with jumps ``S`` and ``S^H``
  for the cut-off right shift; irreducible and primitive with invariant
  density ``I/n``.  The untruncated chain is irreducible with no invariant
  density at all; the truncation deliberately differs there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .gksl import HEISENBERG, GkslModel, apply_generator, build_model, vectorize
from .operator_core import DEFAULT_TOL, Tolerances, ValidationError, opnorm, vec

__all__ = [
    "ModelSpec",
    "truncated_birth_death",
    "classical_restriction",
    "standard_fixture",
    "random_gksl",
    "haar_unitary",
    "FIXTURE_NAMES",
]

FIXTURE_NAMES = ("AD2", "DP2", "U2", "BD3")

_BD_PATTERN = re.compile(r"^BD(\d+)$")


@dataclass(frozen=True)
class ModelSpec:
    """Deterministic recipe (name plus parameters) for a model."""

    name: str
    parameters: dict

    def build(self) -> GkslModel:
        if self.name == "random":
            return random_gksl(**self.parameters)
        if self.name == "birth_death":
            return truncated_birth_death(**self.parameters)
        return standard_fixture(self.name)


def _shift(n: int) -> np.ndarray:
    s = np.zeros((n, n), dtype=complex)
    for k in range(n - 1):
        s[k + 1, k] = 1.0
    return s


def truncated_birth_death(n: int, tol: Tolerances = DEFAULT_TOL) -> GkslModel:
    """Finite birth-death chain: jumps are the cut-off right shift and its adjoint.

    The hard cutoff (the shift annihilates the last basis vector) keeps the
    jump pair mutually adjoint, so the self-adjoint-span criterion stays
    applicable, and makes the chain doubly stochastic: the maximally mixed
    state is invariant.
    """
    n = int(n)
    if n < 2:
        raise ValidationError("truncated_birth_death needs n >= 2")
    s = _shift(n)
    return build_model(np.zeros((n, n)), [s, s.conj().T], tol)


def classical_restriction(model: GkslModel, tol: Tolerances = DEFAULT_TOL):
    """Generator of the diagonal (classical) restriction, when it exists.

    Compresses the Heisenberg generator with the diagonal conditional
    expectation ``E``.  The compression is a faithful restriction only when
    ``E`` commutes with the generator; the commutator norm of the two
    vectorized superoperators is the applicability test.  Returns the real
    ``n x n`` classical generator, or ``(None, residual)`` when the check
    fails.
    """
    n = model.dim
    matrix = vectorize(model, HEISENBERG).matrix
    diag_mask = np.zeros(n * n)
    for k in range(n):
        diag_mask[k + n * k] = 1.0
    compress = np.diag(diag_mask).astype(complex)
    commutator = compress @ matrix - matrix @ compress
    residual = float(np.linalg.norm(commutator))
    if residual > tol.eq * max(1.0, opnorm(matrix)) * n:
        return None, residual
    rates = np.zeros((n, n))
    for j in range(n):
        unit = np.zeros((n, n), dtype=complex)
        unit[j, j] = 1.0
        image = apply_generator(model, unit)
        rates[:, j] = image.diagonal().real
    return rates, residual


def standard_fixture(name: str, tol: Tolerances = DEFAULT_TOL) -> GkslModel:
    """Build one of the named fixtures (AD2, DP2, U2, BD3, BD<n>)."""
    key = str(name).strip().upper()
    if key == "AD2":
        sigma_minus = np.array([[0, 1], [0, 0]], dtype=complex)
        return build_model(np.zeros((2, 2)), [sigma_minus], tol)
    if key == "DP2":
        sigma_z = np.diag([1.0, -1.0]).astype(complex)
        return build_model(np.zeros((2, 2)), [sigma_z], tol)
    if key == "U2":
        sigma_z = np.diag([1.0, -1.0]).astype(complex)
        return build_model(sigma_z, [], tol)
    match = _BD_PATTERN.match(key)
    if match:
        return truncated_birth_death(int(match.group(1)), tol)
    raise ValidationError(f"unknown fixture name {name!r}")


def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via the phase-fixed QR of a Ginibre matrix."""
    q, r = np.linalg.qr(_ginibre(rng, k))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_gksl(n: int, k: int, seed: int, tol: Tolerances = DEFAULT_TOL) -> GkslModel:
    """Seeded random model: Hermitian Ginibre Hamiltonian, k unit-norm jumps."""
    n = int(n)
    k = int(k)
    if n < 2 or k < 1:
        raise ValidationError("random_gksl needs n >= 2 and k >= 1")
    rng = np.random.default_rng(seed)
    g = _ginibre(rng, n)
    hamiltonian = 0.5 * (g + g.conj().T)
    jumps = []
    for _ in range(k):
        L = _ginibre(rng, n)
        jumps.append(L / opnorm(L))
    return build_model(hamiltonian, jumps, tol)
