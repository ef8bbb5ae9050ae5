"""Oscillator-guided subspaces for cheap near-exact spectra.

In the strong-coupling regime the sampled oscillator eigenfunctions span the
low-lying exact eigenstates, so diagonalizing the Hamiltonian projected onto
a few hundred of them reproduces the exact spectrum to high accuracy. In the
weak regime the eigenfunctions themselves are poor, but the equilibrium
point and widths still locate the important quasi-spin basis states, so a
small set of ranked basis states serves the same purpose. Both roads end in
a Ritz diagonalization and give variational upper bounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import eig, hamiltonian, sha
from .model import PairingModel, QuasispinBasis, enumerate_basis

SUBSPACE_KINDS = ("sha-vectors", "su2-states")
RANKING_RULES = ("diagonal-energy", "sha-weight")
DEFAULT_QUANTA_MAX = 10
DEFAULT_DROP_TOL = 1e-8


@dataclass(frozen=True)
class SubspaceSpec:
    """What to span: sampled oscillator vectors or ranked basis states.

    `sha-vectors` uses every quanta set with total quanta <= quanta_max
    (defaults to 10). `su2-states` keeps the `size` best basis states under
    the chosen ranking rule.
    """

    kind: str
    size: int | None = None
    quanta_max: int | None = None
    rank: str = "diagonal-energy"

    def __post_init__(self):
        if self.kind not in SUBSPACE_KINDS:
            raise ValueError(f"kind must be one of {SUBSPACE_KINDS}, got {self.kind!r}")
        if self.rank not in RANKING_RULES:
            raise ValueError(f"rank must be one of {RANKING_RULES}, got {self.rank!r}")
        if self.kind == "su2-states":
            if self.size is None or self.size < 1:
                raise ValueError("su2-states needs size >= 1")
        else:
            if self.size is not None:
                raise ValueError("sha-vectors is sized by quanta_max, not size")
            if self.quanta_max is not None and self.quanta_max < 0:
                raise ValueError("quanta_max must be non-negative")


def quanta_cutoff_set(n_modes: int, max_total: int) -> list[tuple[int, ...]]:
    """All quanta tuples with sum <= max_total.

    Ordered by ascending total quanta, then lexicographically; the count is
    binomial(max_total + n_modes, n_modes).
    """
    if n_modes < 0 or max_total < 0:
        raise ValueError("n_modes and max_total must be non-negative")

    def compositions(total: int, parts: int):
        if parts == 0:
            return [()] if total == 0 else []
        return [
            (first,) + rest
            for first in range(total + 1)
            for rest in compositions(total - first, parts - 1)
        ]

    out: list[tuple[int, ...]] = []
    for total in range(max_total + 1):
        out.extend(compositions(total, n_modes))
    return out


def sample_sha_vectors(modes: sha.NormalModes, basis: QuasispinBasis, quanta_set):
    """Sample each oscillator eigenfunction on the basis grid, unit-normalized.

    Returns (vectors, kept_quanta) with vectors of shape (dimension, kept).
    A vector whose raw norm underflows below 1e-300 is dropped with a warning.
    """
    quanta_set = list(quanta_set)
    if not quanta_set:
        raise ValueError("quanta set must be non-empty")
    m_grid = basis.m
    columns = []
    kept = []
    for nu in quanta_set:
        raw = sha.sha_wavefunction(modes, nu, m_grid)
        norm = float(np.linalg.norm(raw))
        if norm < 1e-300:
            warnings.warn(f"dropping quanta {tuple(nu)}: zero norm on the grid")
            continue
        columns.append(raw / norm)
        kept.append(tuple(int(n) for n in nu))
    if not columns:
        raise ValueError("every sampled vector had zero norm on the grid")
    return np.column_stack(columns), kept


def orthonormalize(vectors: np.ndarray, drop_tol: float = DEFAULT_DROP_TOL) -> np.ndarray:
    """Orthonormalize columns in order, dropping near-dependent ones.

    Modified Gram-Schmidt with a second projection pass; a column whose
    residual norm after projection falls below drop_tol is discarded. Input
    order is the priority order, so an already-orthonormal set comes back
    unchanged up to normalization.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[1] == 0:
        raise ValueError("need a non-empty set of column vectors")
    kept: list[np.ndarray] = []
    for col in V.T:
        w = col.astype(float, copy=True)
        for _ in range(2):
            for u in kept:
                w -= (u @ w) * u
        norm = float(np.linalg.norm(w))
        if norm >= drop_tol:
            kept.append(w / norm)
    if not kept:
        raise ValueError("all vectors dropped during orthonormalization")
    return np.column_stack(kept)


def select_su2_states(
    model: PairingModel,
    basis: QuasispinBasis,
    rule: str,
    count: int,
    modes: sha.NormalModes | None = None,
) -> np.ndarray:
    """Indices of the `count` most relevant basis states under a ranking rule.

    `diagonal-energy` keeps the states of smallest diagonal matrix element;
    `sha-weight` keeps the states of largest zero-quanta Gaussian weight
    exp(-1/2 sum_i (zeta_i/sigma_i)^2), ranked through the log-weight so grid
    points far in the Gaussian tail never collapse into underflow ties. Ties
    break on basis index.
    """
    if not 1 <= count <= basis.dimension:
        raise ValueError(f"count must be in [1, {basis.dimension}], got {count}")
    if rule == "diagonal-energy":
        keys = hamiltonian.diagonal_elements(model, basis)
    elif rule == "sha-weight":
        if modes is None or modes.origin is None:
            raise ValueError("sha-weight ranking needs normal modes with a grid origin")
        zeta = (basis.m - modes.origin) @ modes.mode_vectors.T
        keys = 0.5 * np.sum((zeta / modes.sigma) ** 2, axis=1)
    else:
        raise ValueError(f"unknown ranking rule {rule!r}")
    return np.argsort(keys, kind="stable")[:count]


@dataclass(eq=False)
class SubspaceRunResult:
    """Ritz spectrum plus bookkeeping for one subspace run."""

    spectrum: eig.SpectrumResult
    spec: SubspaceSpec
    subspace_size: int
    shift_method: str | None = None
    overlaps: np.ndarray | None = None


def run_subspace(
    model: PairingModel,
    spec: SubspaceSpec,
    *,
    basis: QuasispinBasis | None = None,
    matrix: hamiltonian.SymmetricOperatorMatrix | None = None,
    exact: eig.SpectrumResult | None = None,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> SubspaceRunResult:
    """Build the requested subspace and Ritz-diagonalize the Hamiltonian in it.

    `basis` and `matrix` are rebuilt when not supplied. When `exact` carries
    eigenvectors, index-wise overlap magnitudes between Ritz and exact states
    are reported. Shift solving falls back to the constraint-only point when
    the full system has no interior solution, which is the expected path deep
    in the weak-coupling regime.
    """
    if basis is None:
        basis = enumerate_basis(model)
    if matrix is None:
        matrix = hamiltonian.build_hamiltonian(model, basis)

    shift_method = None
    if spec.kind == "sha-vectors" or spec.rank == "sha-weight":
        shift = sha.solve_shifts_with_fallback(model)
        modes = sha.compute_normal_modes(model, shift)
        shift_method = shift.method
    else:
        modes = None

    if spec.kind == "sha-vectors":
        quanta_max = DEFAULT_QUANTA_MAX if spec.quanta_max is None else spec.quanta_max
        quanta = quanta_cutoff_set(modes.n_modes, quanta_max)
        sampled, _ = sample_sha_vectors(modes, basis, quanta)
        V = orthonormalize(sampled, drop_tol=drop_tol)
    else:
        indices = select_su2_states(model, basis, spec.rank, spec.size, modes=modes)
        V = np.zeros((basis.dimension, len(indices)))
        V[indices, np.arange(len(indices))] = 1.0

    spectrum = eig.ritz_diagonalize(matrix, V, want_vectors=True)

    overlaps = None
    if exact is not None and exact.eigenvectors is not None and spectrum.eigenvectors is not None:
        shared = min(exact.eigenvectors.shape[1], spectrum.eigenvectors.shape[1])
        overlaps = np.abs(
            np.sum(exact.eigenvectors[:, :shared] * spectrum.eigenvectors[:, :shared], axis=0)
        )
    return SubspaceRunResult(
        spectrum=spectrum,
        spec=spec,
        subspace_size=V.shape[1],
        shift_method=shift_method,
        overlaps=overlaps,
    )
