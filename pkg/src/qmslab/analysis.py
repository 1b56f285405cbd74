"""Decision procedures for GKSL dynamics.

Every boolean question (subharmonicity, irreducibility, primitivity,
positivity improvement) is answered by an algebraic criterion and, where a
mathematically equivalent route exists, cross-checked against it.  The two
routes agreeing is part of the contract: a disagreement beyond tolerance is
numerical breakdown and raises :class:`InternalInconsistencyError` instead
of returning a verdict.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .algebra import (
    OperatorSpace,
    commutant,
    generated_algebra,
    iterated_commutator_span,
    orbit_subspace,
)
from .gksl import (
    HEISENBERG,
    SCHRODINGER,
    GkslModel,
    apply_generator,
    apply_predual,
    vectorize,
)
from .operator_core import (
    DEFAULT_TOL,
    InternalInconsistencyError,
    NumericalFailureError,
    Subspace,
    Tolerances,
    ValidationError,
    hermitian_part,
    is_psd,
    opnorm,
    trace_norm,
    unvec,
    validate_density,
    validate_projection,
    vec,
)

__all__ = [
    "Verdict",
    "SpectralReport",
    "is_subharmonic",
    "check_irreducibility",
    "self_adjoint_span_criterion",
    "fixed_point_space",
    "invariant_density_space",
    "check_primitivity",
    "peripheral_spectrum",
    "reversible_subalgebra",
    "decoherence_free_subalgebra",
    "support_reachable_space",
    "check_positivity_improving",
    "check_peripheral_triviality",
]


@dataclass(frozen=True)
class Verdict:
    """Boolean answer plus the criterion used, a witness and diagnostics."""

    value: bool
    criterion: str
    witness: object | None = None
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        witness: object | None
        if self.witness is None:
            witness = None
        elif isinstance(self.witness, Subspace):
            witness = {"kind": "subspace", "frame": jsonio.matrix_to_json(self.witness.frame)}
        else:
            witness = {"kind": "matrix", "matrix": jsonio.matrix_to_json(self.witness)}
        return {
            "value": bool(self.value),
            "criterion": self.criterion,
            "witness": witness,
            "residuals": {k: _plain(v) for k, v in self.residuals.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return v


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of the Heisenberg generator and its peripheral part."""

    eigenvalues: tuple[complex, ...]
    peripheral: tuple[complex, ...]
    zero_multiplicity: int

    def peripheral_is_trivial(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        """No peripheral eigenvalue besides a simple zero."""
        nonzero = [z for z in self.peripheral if abs(z) > tol.spectral]
        return not nonzero and self.zero_multiplicity == 1

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [jsonio.complex_to_pair(z) for z in self.eigenvalues],
            "peripheral": [jsonio.complex_to_pair(z) for z in self.peripheral],
            "zero_multiplicity": self.zero_multiplicity,
        }


def _sorted_eigenvalues(values: np.ndarray) -> list[complex]:
    order = np.lexsort((-values.imag, -values.real))
    return [complex(values[i]) for i in order]


def is_subharmonic(model: GkslModel, p, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Decide whether a projection is subharmonic for the semigroup.

    Two equivalent criteria are evaluated and must agree: (a) the generator
    applied to the projection is positive semidefinite, and (b) the range of
    the projection is invariant under the drift and every jump operator
    (vanishing lower-left blocks).
    """
    p = validate_projection(p, tol)
    if p.shape != (model.dim, model.dim):
        raise ValidationError("projection dimension does not match the model")
    generated = apply_generator(model, p)
    psd_ok = is_psd(generated, tol)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(generated)).min())

    complement = np.eye(model.dim, dtype=complex) - p
    block = opnorm(complement @ model.drift @ p) / max(1.0, opnorm(model.drift))
    for L in model.jumps:
        block = max(block, opnorm(complement @ L @ p) / max(1.0, opnorm(L)))
    invariant_ok = block <= tol.eq

    if psd_ok != invariant_ok:
        raise InternalInconsistencyError(
            "subharmonicity criteria disagree: "
            f"generator-psd={psd_ok} (min eig {min_eig:.3e}), "
            f"invariant-range={invariant_ok} (block residual {block:.3e})"
        )
    return Verdict(
        value=psd_ok,
        criterion="generator-psd+invariant-range",
        residuals={"generator_min_eigenvalue": min_eig, "block_residual": float(block)},
    )


def _witness_candidates(model: GkslModel, tol: Tolerances) -> list[np.ndarray]:
    n = model.dim
    candidates = [np.eye(n, dtype=complex)[:, i] for i in range(n)]
    for a in (model.drift, *model.jumps):
        _, vectors = np.linalg.eig(a)
        candidates.extend(vectors[:, i] for i in range(n))
    kernel = _kernel_space(model, SCHRODINGER, tol)
    for b in kernel.basis:
        _, vectors = np.linalg.eigh(hermitian_part(b))
        candidates.extend(vectors[:, i] for i in range(n))
    return candidates


def check_irreducibility(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Burnside test: the algebra generated by the drift and the jumps.

    The semigroup is irreducible exactly when that algebra is everything
    (dimension n^2).  When it is not, a best-effort scan over canonical
    basis vectors and eigenvectors of the model operators tries to exhibit
    a proper invariant subspace as a witness; the verdict itself never
    depends on the scan succeeding.
    """
    n = model.dim
    operators = [model.drift, *model.jumps]
    alg = generated_algebra(operators, include_identity=True, tol=tol)
    irreducible = alg.dim == n * n
    witness = None
    if not irreducible:
        for v in _witness_candidates(model, tol):
            orbit = orbit_subspace(operators, v, tol)
            if 0 < orbit.dim < n:
                witness = orbit
                break
    return Verdict(
        value=irreducible,
        criterion="burnside-generated-algebra",
        witness=witness,
        residuals={"algebra_dim": alg.dim, "full_dim": n * n},
    )


def self_adjoint_span_criterion(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> bool | None:
    """Sufficient irreducibility test for self-adjoint jump spans.

    Applicable only when span{L_l} equals span{L_l^H}; returns ``None``
    otherwise.  When applicable, a trivial commutant of the jumps proves
    irreducibility (``True``); ``False`` only means inconclusive.
    """
    n = model.dim
    if not model.jumps:
        return commutant([], tol, dim=n).dim == 1
    span = Subspace.from_span([vec(L) for L in model.jumps], n * n, tol)
    adjoint_span = Subspace.from_span([vec(L.conj().T) for L in model.jumps], n * n, tol)
    if span.dim != adjoint_span.dim:
        return None
    mismatch = opnorm(span.projector() - adjoint_span.projector())
    if mismatch > max(tol.eq * 100.0, 1e-8):
        return None
    return commutant(list(model.jumps), tol).dim == 1


def _kernel_space(model: GkslModel, side: str, tol: Tolerances) -> OperatorSpace:
    matrix = vectorize(model, side).matrix
    _, s, vh = np.linalg.svd(matrix)
    top = s.max() if s.size else 0.0
    rank = int(np.sum(s > tol.rank * max(top, 1.0)))
    kernel = vh[rank:].conj().T
    return OperatorSpace.from_columns(kernel, model.dim, tol)


def fixed_point_space(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> OperatorSpace:
    """Kernel of the Heisenberg generator; for bounded generators these are
    exactly the operators fixed by the whole semigroup.

    The identity must lie in the kernel; when the extracted invariant
    density is faithful the kernel is verified to be closed under products.
    """
    space = _kernel_space(model, HEISENBERG, tol)
    if not space.contains_identity:
        raise InternalInconsistencyError(
            "fixed-point space does not contain the identity"
        )
    try:
        _, rho = invariant_density_space(model, tol)
    except NumericalFailureError:
        rho = None
    if rho is not None:
        faithful = float(np.linalg.eigvalsh(hermitian_part(rho)).min()) > tol.psd
        if faithful and not space.multiplicatively_closed:
            raise InternalInconsistencyError(
                "fixed-point space of a model with faithful invariant density "
                "is not multiplicatively closed"
            )
    return space


def _extraction_candidates(kernel: OperatorSpace, n: int) -> list[np.ndarray]:
    columns = kernel.basis_columns()
    candidates = []
    identity = vec(np.eye(n, dtype=complex) / n)
    projected = columns @ (columns.conj().T @ identity)
    candidates.append(hermitian_part(unvec(projected, n)))
    for b in kernel.basis:
        candidates.append(hermitian_part(b))
        candidates.append(hermitian_part(-1j * b))
    return [c for c in candidates if np.linalg.norm(c) > 1e-14]


def _try_density(candidate: np.ndarray, model: GkslModel, tol: Tolerances) -> np.ndarray | None:
    h = hermitian_part(candidate)
    if np.trace(h).real < 0.0:
        h = -h
    eigenvalues = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.abs(eigenvalues).max()))
    if eigenvalues.min() < -tol.psd * scale:
        return None
    tr = np.trace(h).real
    if tr <= 0.0:
        return None
    rho = h / tr
    rho = hermitian_part(rho)
    # clip the tiny negative round-off tail so the result validates cleanly
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    rho = rho / np.trace(rho).real
    residual = trace_norm(apply_predual(model, rho))
    if residual > tol.eq * (1.0 + opnorm(vectorize(model, SCHRODINGER).matrix)):
        return None
    return rho


def invariant_density_space(
    model: GkslModel, tol: Tolerances = DEFAULT_TOL
) -> tuple[OperatorSpace, np.ndarray | None]:
    """Kernel of the predual generator and one extracted invariant density.

    The kernel is closed under adjoints, so Hermitian candidates are drawn
    from it directly: first the kernel projection of the maximally mixed
    state, then Hermitian and anti-Hermitian parts of the kernel basis.  If
    no candidate is positive, the Cesaro mean of the maximally mixed state
    (horizon 100 over the spectral-gap estimate) is projected back onto the
    kernel.  In finite dimension an invariant density always exists, so
    exhausting every strategy raises :class:`NumericalFailureError` with the
    kernel attached as ``exc.kernel``.
    """
    n = model.dim
    kernel = _kernel_space(model, SCHRODINGER, tol)
    for candidate in _extraction_candidates(kernel, n):
        rho = _try_density(candidate, model, tol)
        if rho is not None:
            return kernel, rho

    # fall back to time averaging toward the invariant set
    from .dynamics import cesaro_mean

    matrix = vectorize(model, HEISENBERG).matrix
    eigenvalues = np.linalg.eigvals(matrix)
    decaying = np.abs(eigenvalues.real[eigenvalues.real < -tol.spectral])
    horizon = 100.0 / decaying.min() if decaying.size else 100.0
    averaged = cesaro_mean(model, np.eye(n, dtype=complex) / n, horizon, tol=tol)
    columns = kernel.basis_columns()
    projected = hermitian_part(unvec(columns @ (columns.conj().T @ vec(averaged)), n))
    w, v = np.linalg.eigh(projected)
    if w.max() > 0.0 and w.min() >= -1e-6 * w.max():
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
        rho = rho / np.trace(rho).real
        residual = trace_norm(apply_predual(model, rho))
        if residual <= 1e-8 * (1.0 + opnorm(vectorize(model, SCHRODINGER).matrix)):
            return kernel, rho

    exc = NumericalFailureError("could not extract an invariant density from the kernel")
    exc.kernel = kernel
    raise exc


def check_primitivity(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Unique faithful invariant density, cross-checked against irreducibility.

    Primitivity holds when the predual kernel is one-dimensional and the
    extracted density is strictly positive.  In finite dimension this is
    equivalent to irreducibility, so the Burnside verdict must agree.
    """
    kernel, rho = invariant_density_space(model, tol)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(rho)).min())
    primitive = kernel.dim == 1 and min_eig > tol.psd
    irreducible = check_irreducibility(model, tol)
    if primitive != irreducible.value:
        raise InternalInconsistencyError(
            f"primitivity ({primitive}) disagrees with irreducibility "
            f"({irreducible.value}); kernel dim {kernel.dim}, "
            f"density min eigenvalue {min_eig:.3e}"
        )
    return Verdict(
        value=primitive,
        criterion="unique-faithful-invariant-density",
        witness=rho if primitive else None,
        residuals={"kernel_dim": kernel.dim, "density_min_eigenvalue": min_eig},
    )


def peripheral_spectrum(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> SpectralReport:
    """Full generator spectrum plus the part sitting on the imaginary axis."""
    matrix = vectorize(model, HEISENBERG).matrix
    try:
        values = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed: {exc}") from exc
    scale = max(1.0, opnorm(matrix))
    cutoff = tol.spectral * scale
    if values.real.max() > cutoff:
        raise NumericalFailureError(
            f"generator spectrum leaks into the right half plane "
            f"(max real part {values.real.max():.3e})"
        )
    eigenvalues = _sorted_eigenvalues(values)
    peripheral = [z for z in eigenvalues if z.real >= -cutoff]
    zero_multiplicity = int(sum(1 for z in eigenvalues if abs(z) <= cutoff))
    if zero_multiplicity < 1:
        raise NumericalFailureError("zero is missing from the generator spectrum")
    return SpectralReport(
        eigenvalues=tuple(eigenvalues),
        peripheral=tuple(peripheral),
        zero_multiplicity=zero_multiplicity,
    )


def reversible_subalgebra(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> OperatorSpace:
    """Span of generator eigenvectors with purely imaginary eigenvalues.

    On this span the dynamics acts by unimodular phases.  Near-defective
    peripheral eigenvalues (geometric rank below the cluster size) are
    reported through :mod:`warnings`; the eigenvector span is still
    returned.
    """
    matrix = vectorize(model, HEISENBERG).matrix
    values, vectors = np.linalg.eig(matrix)
    scale = max(1.0, opnorm(matrix))
    cutoff = tol.spectral * scale
    peripheral_idx = np.nonzero(np.abs(values.real) <= cutoff)[0]
    _warn_if_defective(values[peripheral_idx], vectors[:, peripheral_idx], cutoff, tol)
    frame = Subspace.from_span(
        [vectors[:, i] for i in peripheral_idx], model.dim**2, tol
    ).frame
    return OperatorSpace.from_columns(frame, model.dim, tol)


def _warn_if_defective(values: np.ndarray, vectors: np.ndarray, cutoff: float, tol: Tolerances) -> None:
    remaining = list(range(len(values)))
    cluster_radius = max(10.0 * cutoff, 1e-12)
    while remaining:
        head = remaining[0]
        cluster = [i for i in remaining if abs(values[i] - values[head]) <= cluster_radius]
        remaining = [i for i in remaining if i not in cluster]
        block = vectors[:, cluster]
        s = np.linalg.svd(block, compute_uv=False)
        rank = int(np.sum(s > max(tol.rank, 1e-8) * s.max())) if s.size else 0
        if rank < len(cluster):
            warnings.warn(
                f"peripheral eigenvalue {values[head]:.6g} looks defective: "
                f"algebraic multiplicity {len(cluster)}, eigenvector rank {rank}",
                RuntimeWarning,
                stacklevel=3,
            )


def decoherence_free_subalgebra(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> OperatorSpace:
    """Commutant of all iterated Hamiltonian commutators of the jumps.

    The generating set is ``{ad_H^k(L_l), ad_H^k(L_l^H) : k >= 0}``; its
    commutant is the largest subalgebra on which the evolution acts by
    automorphisms.  The result must come back as a self-adjoint algebra
    containing the identity.
    """
    seeds = list(model.jumps) + [L.conj().T for L in model.jumps]
    span = iterated_commutator_span(model.hamiltonian, seeds, tol) if seeds else []
    space = commutant(span, tol, dim=model.dim)
    if not (space.contains_identity and space.self_adjoint and space.multiplicatively_closed):
        raise InternalInconsistencyError(
            "decoherence-free subalgebra failed its structural checks"
        )
    return space


def support_reachable_space(model: GkslModel, psi, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Algebraic support of the evolved pure state, time-independent part.

    The support of the evolved state at any ``t > 0`` is the invertible
    drift semigroup applied to the smallest subspace containing ``psi`` and
    invariant under every iterated drift commutator of the jumps, so its
    dimension equals the dimension computed here.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if np.linalg.norm(psi) == 0.0:
        raise ValidationError("psi must be a nonzero vector")
    if psi.size != model.dim:
        raise ValidationError("psi dimension does not match the model")
    span = iterated_commutator_span(model.drift, list(model.jumps), tol)
    return orbit_subspace(span, psi, tol)


def check_positivity_improving(
    model: GkslModel,
    tol: Tolerances = DEFAULT_TOL,
    n_random: int = 20,
    seed: int = 171,
) -> Verdict:
    """Certificate for full-support evolution of every pure state.

    The universally quantified definition is sampled on the canonical basis
    plus seeded random unit vectors; when the Burnside test is negative its
    witness frame is added to the certificate set, which pins the verdict to
    the invariant-subspace structure instead of sampling luck.  In finite
    dimension positivity improvement is equivalent to irreducibility, so
    the two verdicts must agree.
    """
    n = model.dim
    irreducible = check_irreducibility(model, tol)
    rng = np.random.default_rng(seed)
    candidates = [np.eye(n, dtype=complex)[:, i] for i in range(n)]
    for _ in range(n_random):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        candidates.append(v / np.linalg.norm(v))
    if not irreducible.value and irreducible.witness is not None:
        frame = irreducible.witness.frame
        candidates.extend(frame[:, j] for j in range(frame.shape[1]))
    improving = True
    min_dim = n
    witness = None
    for v in candidates:
        orbit = support_reachable_space(model, v, tol)
        if orbit.dim < min_dim:
            min_dim = orbit.dim
            witness = orbit
        if orbit.dim < n:
            improving = False
            break
    if improving != irreducible.value:
        raise InternalInconsistencyError(
            f"positivity improvement ({improving}) disagrees with "
            f"irreducibility ({irreducible.value})"
        )
    return Verdict(
        value=improving,
        criterion="full-support-orbits",
        witness=witness if not improving else None,
        residuals={"min_orbit_dim": min_dim, "vectors_tested": len(candidates)},
    )


def check_peripheral_triviality(model: GkslModel, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Primitivity together with a trivial peripheral spectrum.

    A simple zero eigenvalue with nothing else on the imaginary axis, on
    top of a unique faithful invariant density; in finite dimension this
    composite is equivalent to irreducibility.  The spectral facts alone do
    not suffice (a reducible model can relax to a non-faithful density with
    a perfectly trivial peripheral spectrum), hence the conjunction.
    """
    primitive = check_primitivity(model, tol)
    report = peripheral_spectrum(model, tol)
    spectral_ok = report.peripheral_is_trivial(tol)
    value = primitive.value and spectral_ok
    return Verdict(
        value=value,
        criterion="primitive+trivial-peripheral-spectrum",
        residuals={
            "zero_multiplicity": report.zero_multiplicity,
            "peripheral_count": len(report.peripheral),
        },
    )
