"""Symmetric eigensolver layer: reference spectra and projected (Ritz) spectra.

Dense LAPACK is used up to a configurable dimension cap (default 6000, which
covers the benchmark model comfortably); above it a Lanczos-type iterative
solve takes over. Ritz spectra come from diagonalizing the projection of the
operator onto an orthonormal subspace and are variational upper bounds on
the exact eigenvalues, index by index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import NonConvergence
from .hamiltonian import SymmetricOperatorMatrix

DENSE_CAP = 6000


@dataclass(eq=False)
class SpectrumResult:
    """Ascending eigenvalues, optional orthonormal eigenvectors, solver metadata."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    solver: str
    residual_norms: np.ndarray | None = None

    @property
    def excitations(self) -> np.ndarray:
        return self.eigenvalues - self.eigenvalues[0]


def _as_operator(matrix):
    if isinstance(matrix, SymmetricOperatorMatrix):
        return matrix.to_sparse()
    if sparse.issparse(matrix):
        return matrix.tocsr()
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix must be square")
    return arr


def _inf_norm(op) -> float:
    if sparse.issparse(op):
        return float(np.abs(op).sum(axis=1).max())
    return float(np.abs(op).sum(axis=1).max())


def _check_contract(op, values, vectors, residual_tol, ortho_tol, solver):
    scale = max(1.0, _inf_norm(op))
    residuals = np.linalg.norm(op @ vectors - vectors * values[None, :], axis=0)
    if np.any(residuals > residual_tol * scale):
        raise NonConvergence(
            f"{solver}: residual {residuals.max():.3e} exceeds {residual_tol:.1e} * |H|"
        )
    gram = vectors.T @ vectors
    if np.abs(gram - np.eye(gram.shape[0])).max() > ortho_tol:
        raise NonConvergence(f"{solver}: eigenvectors not orthonormal to {ortho_tol:.1e}")
    return residuals


def diagonalize(
    matrix,
    count: int | None = None,
    want_vectors: bool = True,
    *,
    dense_cap: int = DENSE_CAP,
    solver: str = "auto",
    residual_tol: float = 1e-9,
    ortho_tol: float = 1e-10,
    maxiter: int | None = None,
) -> SpectrumResult:
    """Lowest `count` eigenpairs of a symmetric matrix.

    `solver` is "auto" (dense up to `dense_cap`, Lanczos above), "dense" or
    "lanczos". Results are checked against the residual and orthonormality
    contract and a NonConvergence is raised if the solver missed it.
    """
    op = _as_operator(matrix)
    dim = op.shape[0]
    if count is None:
        count = dim
    if not 1 <= count <= dim:
        raise ValueError(f"count must be in [1, {dim}], got {count}")

    if solver == "auto":
        solver = "dense" if dim <= dense_cap else "lanczos"
    if solver not in ("dense", "lanczos"):
        raise ValueError(f"unknown solver {solver!r}")

    if solver == "dense":
        dense = op.toarray() if sparse.issparse(op) else op
        subset = (0, count - 1) if count < dim else None
        if want_vectors:
            values, vectors = eigh(dense, subset_by_index=subset)
        else:
            values = eigh(dense, eigvals_only=True, subset_by_index=subset)
            vectors = None
        kind = "dense-lapack"
    else:
        if count > dim - 1:
            raise ValueError("iterative solve needs count <= dimension - 1")
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        try:
            values, vectors = eigsh(op, k=count, which="SA", v0=v0, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise NonConvergence(f"Lanczos did not converge: {exc}") from exc
        if not want_vectors:
            vectors = None
        kind = "lanczos-arpack"

    order = np.argsort(values, kind="stable")
    values = np.asarray(values)[order][:count]
    residuals = None
    if vectors is not None:
        vectors = np.asarray(vectors)[:, order][:, :count]
        residuals = _check_contract(op, values, vectors, residual_tol, ortho_tol, kind)
    return SpectrumResult(
        eigenvalues=values, eigenvectors=vectors, solver=kind, residual_norms=residuals
    )


def ritz_diagonalize(
    matrix,
    subspace_vectors: np.ndarray,
    want_vectors: bool = True,
    *,
    orthonormal_tol: float = 1e-8,
) -> SpectrumResult:
    """Eigenpairs of the operator projected onto orthonormal subspace columns.

    The s x s projected matrix is diagonalized and the eigenvectors lifted
    back to full-space columns. Residual norms against the full operator are
    reported as diagnostics; they measure subspace quality, not solver error,
    so no tolerance is enforced on them here.
    """
    op = _as_operator(matrix)
    V = np.asarray(subspace_vectors, dtype=float)
    if V.ndim != 2 or V.shape[0] != op.shape[0]:
        raise ValueError("subspace vectors must be columns of full-space length")
    if V.shape[1] == 0:
        raise ValueError("empty subspace")
    gram = V.T @ V
    if np.abs(gram - np.eye(V.shape[1])).max() > orthonormal_tol:
        raise ValueError("subspace columns are not orthonormal; orthonormalize first")

    HV = op @ V
    projected = V.T @ HV
    projected = 0.5 * (projected + projected.T)
    values, coeffs = eigh(projected)

    vectors = None
    residuals = None
    if want_vectors:
        vectors = V @ coeffs
        residuals = np.linalg.norm(op @ vectors - vectors * values[None, :], axis=0)
    return SpectrumResult(
        eigenvalues=values, eigenvectors=vectors, solver="ritz", residual_norms=residuals
    )
