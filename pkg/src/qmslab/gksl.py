"""GKSL generator data: construction, validation, application, vectorization.

A model stores the Hamiltonian ``H``, the jump operators ``L_l`` and the
derived drift ``G = -iH - (1/2) sum_l L_l^H L_l``.  The Heisenberg generator
acts on observables as

    gen(x) = G^H x + x G + sum_l L_l^H x L_l,

its predual acts on densities as

    gen_*(eta) = G eta + eta G^H + sum_l L_l eta L_l^H,

and the normalization identity ``G^H + G + sum_l L_l^H L_l = 0`` holds by
construction, which makes the generator annihilate the identity and the
predual trace-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import jsonio
from .operator_core import (
    DEFAULT_TOL,
    Tolerances,
    ValidationError,
    as_complex_matrix,
    hermiticity_residual,
    opnorm,
    vec,
)

__all__ = [
    "GkslModel",
    "Superoperator",
    "build_model",
    "apply_generator",
    "apply_predual",
    "vectorize",
    "gauge_transform",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "dump_model",
]

HEISENBERG = "heisenberg"
SCHRODINGER = "schrodinger"


@dataclass(frozen=True)
class GkslModel:
    """Validated GKSL data: dimension, Hamiltonian, jumps and drift."""

    dim: int
    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]
    drift: np.ndarray

    def normalization_residual(self) -> float:
        """Operator norm of ``G^H + G + sum_l L_l^H L_l``."""
        acc = self.drift.conj().T + self.drift
        for jump in self.jumps:
            acc = acc + jump.conj().T @ jump
        return opnorm(acc)


@dataclass(frozen=True)
class Superoperator:
    """Matrix of the generator on vectorized operators (column stacking)."""

    dim: int
    matrix: np.ndarray
    side: str

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        n2 = self.dim * self.dim
        if matrix.shape != (n2, n2):
            raise ValidationError(
                f"superoperator matrix has shape {matrix.shape}, expected {(n2, n2)}"
            )
        if self.side not in (HEISENBERG, SCHRODINGER):
            raise ValidationError(f"unknown superoperator side {self.side!r}")
        object.__setattr__(self, "matrix", matrix)


def build_model(
    H,
    jumps: Sequence,
    tol: Tolerances = DEFAULT_TOL,
) -> GkslModel:
    """Build and validate a GKSL model from a Hamiltonian and jump operators.

    Parameters
    ----------
    H : array_like
        Hermitian ``n x n`` matrix (energy absorbed into the time unit).
    jumps : sequence of array_like
        Finitely many ``n x n`` jump operators; may be empty.
    tol : Tolerances
        Equality cutoff used for Hermiticity and normalization checks.

    Returns
    -------
    GkslModel
        Model with the drift ``G = -iH - (1/2) sum_l L_l^H L_l`` stored and
        the normalization identity verified.
    """
    H = as_complex_matrix(H)
    n = H.shape[0]
    herm_res = hermiticity_residual(H)
    if herm_res > tol.eq * max(1.0, opnorm(H)):
        raise ValidationError(
            f"Hamiltonian is not Hermitian, residual {herm_res:.3e}"
        )
    jump_mats = []
    for k, L in enumerate(jumps):
        L = as_complex_matrix(L)
        if L.shape != (n, n):
            raise ValidationError(
                f"jump operator {k} has shape {L.shape}, expected {(n, n)}"
            )
        jump_mats.append(L)
    drift = -1j * H
    for L in jump_mats:
        drift = drift - 0.5 * (L.conj().T @ L)
    model = GkslModel(dim=n, hamiltonian=H, jumps=tuple(jump_mats), drift=drift)
    residual = model.normalization_residual()
    bound = tol.eq * (1.0 + opnorm(drift))
    if residual > bound:
        raise ValidationError(
            f"normalization identity violated, residual {residual:.3e} > {bound:.3e}"
        )
    return model


def apply_generator(model: GkslModel, x) -> np.ndarray:
    """Heisenberg generator ``G^H x + x G + sum_l L_l^H x L_l``."""
    x = as_complex_matrix(x)
    if x.shape != (model.dim, model.dim):
        raise ValidationError(f"operator shape {x.shape} does not match dim {model.dim}")
    out = model.drift.conj().T @ x + x @ model.drift
    for L in model.jumps:
        out = out + L.conj().T @ x @ L
    return out


def apply_predual(model: GkslModel, eta) -> np.ndarray:
    """Predual generator ``G eta + eta G^H + sum_l L_l eta L_l^H`` (trace-free)."""
    eta = as_complex_matrix(eta)
    if eta.shape != (model.dim, model.dim):
        raise ValidationError(f"operator shape {eta.shape} does not match dim {model.dim}")
    out = model.drift @ eta + eta @ model.drift.conj().T
    for L in model.jumps:
        out = out + L @ eta @ L.conj().T
    return out


def vectorize(model: GkslModel, side: str = HEISENBERG) -> Superoperator:
    """Matrix of the generator on column-stacked operators.

    With ``vec(A X B) = (B^T kron A) vec(X)`` the Heisenberg matrix is
    ``I kron G^H + G^T kron I + sum_l L_l^T kron L_l^H`` and the predual
    matrix is its Hilbert-Schmidt adjoint (conjugate transpose).
    """
    n = model.dim
    eye = np.eye(n, dtype=complex)
    G = model.drift
    if side == HEISENBERG:
        matrix = np.kron(eye, G.conj().T) + np.kron(G.T, eye)
        for L in model.jumps:
            matrix = matrix + np.kron(L.T, L.conj().T)
    elif side == SCHRODINGER:
        matrix = np.kron(eye, G) + np.kron(G.conj(), eye)
        for L in model.jumps:
            matrix = matrix + np.kron(L.conj(), L)
    else:
        raise ValidationError(f"unknown superoperator side {side!r}")
    return Superoperator(dim=n, matrix=matrix, side=side)


def _check_unitary(u: np.ndarray, tol: Tolerances) -> None:
    k = u.shape[0]
    if u.shape != (k, k):
        raise ValidationError("mixing matrix must be square")
    residual = opnorm(u.conj().T @ u - np.eye(k))
    if residual > max(tol.eq * 10.0, 1e-8):
        raise ValidationError(f"mixing matrix is not unitary, residual {residual:.3e}")


def gauge_transform(
    model: GkslModel,
    mixing=None,
    shifts: Sequence[complex] | None = None,
    energy_offset: float = 0.0,
    tol: Tolerances = DEFAULT_TOL,
) -> GkslModel:
    """Re-represent the same generator with mixed or shifted jump operators.

    ``mixing`` is a unitary ``k x k`` matrix acting on the jump index,
    ``L_l -> sum_j u_lj L_j``.  ``shifts`` adds scalars, ``L_l -> L_l + c_l``,
    with the compensating Hamiltonian change
    ``H -> H - (i/2) sum_l (conj(c_l) L_l - c_l L_l^H) + r``.
    Either operation (or both, mixing first) leaves the generator matrix
    unchanged; only the representation moves.
    """
    H = model.hamiltonian
    jumps = list(model.jumps)
    if mixing is not None:
        u = np.asarray(mixing, dtype=complex)
        if u.shape[0] != len(jumps):
            raise ValidationError(
                f"mixing matrix is {u.shape[0]}x{u.shape[1]} but there are {len(jumps)} jumps"
            )
        _check_unitary(u, tol)
        jumps = [
            sum(u[l, j] * jumps[j] for j in range(len(jumps)))
            for l in range(len(jumps))
        ]
    if shifts is not None:
        coeffs = [complex(c) for c in shifts]
        if len(coeffs) != len(jumps):
            raise ValidationError(
                f"got {len(coeffs)} shifts for {len(jumps)} jump operators"
            )
        eye = np.eye(model.dim, dtype=complex)
        correction = np.zeros_like(eye)
        for c, L in zip(coeffs, jumps):
            correction = correction + np.conj(c) * L - c * L.conj().T
        H = H - 0.5j * correction
        jumps = [L + c * eye for c, L in zip(coeffs, jumps)]
    if energy_offset:
        H = H + float(energy_offset) * np.eye(model.dim, dtype=complex)
    return build_model(H, jumps, tol)


def model_to_dict(model: GkslModel) -> dict:
    """Shared model schema: {"dim": n, "H": ..., "L": [...]}."""
    return {
        "dim": model.dim,
        "H": jsonio.matrix_to_json(model.hamiltonian),
        "L": [jsonio.matrix_to_json(L) for L in model.jumps],
    }


def model_from_dict(data: dict, tol: Tolerances | None = None) -> GkslModel:
    """Parse the shared model schema, honoring an optional "tol" block."""
    if not isinstance(data, dict):
        raise ValidationError("model document must be a JSON object")
    for key in ("dim", "H", "L"):
        if key not in data:
            raise ValidationError(f"model document is missing the '{key}' field")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValidationError(f"'dim' must be a positive integer, got {dim!r}")
    if tol is None:
        overrides = data.get("tol", {})
        if not isinstance(overrides, dict):
            raise ValidationError("'tol' must be an object of tolerance overrides")
        tol = Tolerances.from_env(**overrides)
    H = jsonio.json_to_matrix(data["H"])
    if H.shape != (dim, dim):
        raise ValidationError(f"'H' has shape {H.shape}, expected {(dim, dim)}")
    if not isinstance(data["L"], list):
        raise ValidationError("'L' must be a list of matrices")
    jumps = [jsonio.json_to_matrix(entry) for entry in data["L"]]
    for k, L in enumerate(jumps):
        if L.shape != (dim, dim):
            raise ValidationError(f"jump {k} has shape {L.shape}, expected {(dim, dim)}")
    return build_model(H, jumps, tol)


def load_model(path, tol: Tolerances | None = None) -> GkslModel:
    """Load a model JSON file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from exc
    return model_from_dict(data, tol)


def dump_model(model: GkslModel, path=None) -> str:
    """Serialize a model to the shared schema; optionally write it to a file."""
    text = json.dumps(model_to_dict(model), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def unitality_residual(superop: Superoperator) -> float:
    """How far the superoperator is from its side's structural identity."""
    n = superop.dim
    identity_vec = vec(np.eye(n, dtype=complex))
    if superop.side == HEISENBERG:
        return float(np.linalg.norm(superop.matrix @ identity_vec))
    return float(np.linalg.norm(identity_vec.conj() @ superop.matrix))
