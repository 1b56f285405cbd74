"""Shared JSON encoding: complex entries as [re, im] pairs, row-major arrays."""

from __future__ import annotations

import numpy as np

from .operator_core import ValidationError

__all__ = [
    "complex_to_pair",
    "pair_to_complex",
    "matrix_to_json",
    "json_to_matrix",
    "vector_to_json",
    "json_to_vector",
]


def complex_to_pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(obj) -> complex:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ValidationError(f"complex entry must be a [re, im] pair, got {obj!r}")
    re, im = obj
    if isinstance(re, bool) or isinstance(im, bool):
        raise ValidationError("complex entry components must be numbers")
    if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
        raise ValidationError(f"complex entry components must be numbers, got {obj!r}")
    return complex(re, im)


def matrix_to_json(a) -> list[list[list[float]]]:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim {a.ndim}")
    return [[complex_to_pair(z) for z in row] for row in a]


def json_to_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValidationError("matrix must be a non-empty list of rows")
    rows = []
    width = None
    for row in obj:
        if not isinstance(row, list):
            raise ValidationError("matrix rows must be lists")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError("matrix rows have inconsistent lengths")
        rows.append([pair_to_complex(z) for z in row])
    a = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(a.view(float))):
        raise ValidationError("matrix contains non-finite entries")
    return a


def vector_to_json(v) -> list[list[float]]:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return [complex_to_pair(z) for z in v]


def json_to_vector(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValidationError("vector must be a non-empty list of [re, im] pairs")
    v = np.array([pair_to_complex(z) for z in obj], dtype=complex)
    if not np.all(np.isfinite(v.view(float))):
        raise ValidationError("vector contains non-finite entries")
    return v
