"""Assembly of the pairing Hamiltonian in the quasi-spin product basis.

The operator is

    H = sum_p epsilon_p n_p - sum_pq G_pq J+_p J-_q,    n_p = 2 (Jz_p + j_p),

acting on the fixed-N basis. Diagonal elements collect the number operator
and the p = q pair terms through the J+J- eigenvalue (j+m)(j-m+1); the p != q
terms scatter one pair from level q to level p and connect states differing
by (m_p + 1, m_q - 1). The matrix is real symmetric and is stored as its
upper triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .model import PairingModel, QuasispinBasis, _twice

DEFAULT_NNZ_CAP = 50_000_000


def ladder_factor(j: float, m: float, direction: int) -> float:
    """Coefficient in J+-|j m> = sqrt((j -+ m)(j +- m + 1)) |j, m +- 1>.

    `direction` is +1 for raising, -1 for lowering. Out-of-range targets give
    exactly 0. Computed from twice-integers so half-integer spins stay exact.
    """
    tj = _twice(j, "j")
    tm = _twice(m, "m")
    if direction == 1:
        num = (tj - tm) * (tj + tm + 2)
    elif direction == -1:
        num = (tj + tm) * (tj - tm + 2)
    else:
        raise ValueError("direction must be +1 or -1")
    if num <= 0:
        return 0.0
    return math.sqrt(num) / 2.0


def diagonal_elements(model: PairingModel, basis: QuasispinBasis) -> np.ndarray:
    """Diagonal of H over the whole basis, including the seniority offset."""
    two_m = basis.two_m
    two_j = basis.two_j_eff[None, :]
    pairs = (two_m + two_j) // 2
    # J+J- eigenvalue (j+m)(j-m+1) = (2j+2m)(2j-2m+2)/4, exact in integers
    pair_term = (two_j + two_m) * (two_j - two_m + 2) // 4
    energy = pairs @ (2.0 * model.epsilon)
    energy -= pair_term @ np.diag(model.G).astype(float)
    return energy + model.seniority_energy_offset


def diagonal_element(model: PairingModel, m_values) -> float:
    """Diagonal matrix element <m|H|m> for one projection vector."""
    two_m = np.array([_twice(m, "m") for m in m_values], dtype=np.int64)
    if two_m.shape != (model.k,):
        raise ValueError(f"expected {model.k} projections, got {two_m.shape[0]}")
    two_j = model.two_j_eff
    pairs = (two_m + two_j) // 2
    pair_term = (two_j + two_m) * (two_j - two_m + 2) // 4
    return float(
        pairs @ (2.0 * model.epsilon)
        - pair_term @ np.diag(model.G)
        + model.seniority_energy_offset
    )


@dataclass(eq=False)
class SymmetricOperatorMatrix:
    """Real symmetric operator stored as its upper triangle (CSR, diagonal included)."""

    upper: sparse.csr_matrix

    @property
    def dimension(self) -> int:
        return self.upper.shape[0]

    @property
    def nnz(self) -> int:
        return self.upper.nnz

    def to_sparse(self) -> sparse.csr_matrix:
        """Full symmetric matrix in CSR form."""
        diag = sparse.diags(self.upper.diagonal())
        return (self.upper + self.upper.T - diag).tocsr()

    def to_dense(self) -> np.ndarray:
        dense = self.upper.toarray()
        mirror = dense.T.copy()
        np.fill_diagonal(mirror, 0.0)
        return dense + mirror

    def diagonal(self) -> np.ndarray:
        return self.upper.diagonal()

    def dot(self, v: np.ndarray) -> np.ndarray:
        return self.upper @ v + self.upper.T @ v - self.upper.diagonal() * v

    def dump_coordinates(self, path) -> None:
        """Write stored entries as 'row col value' lines at 17 significant digits.

        Only the upper triangle is stored, so each off-diagonal line implies
        its mirrored counterpart.
        """
        coo = self.upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(Path(path), "w", encoding="utf-8") as fh:
            for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{i} {j} {v:.17g}\n")


def build_hamiltonian(
    model: PairingModel,
    basis: QuasispinBasis,
    max_nnz: int = DEFAULT_NNZ_CAP,
) -> SymmetricOperatorMatrix:
    """Assemble H over the basis.

    Each off-diagonal pair is emitted once: moving a pair from level q to
    level p with p < q produces a lexicographically larger state, so
    iterating states and applying the p < q scattering stencil fills exactly
    the upper triangle. The matrix element is
    -G_pq sqrt((j_p-m_p)(j_p+m_p+1)) sqrt((j_q+m_q)(j_q-m_q+1)).
    """
    dim = basis.dimension
    k = basis.k
    worst = dim * (1 + k * (k - 1) // 2)
    if worst > max_nnz:
        raise ValueError(f"estimated nnz {worst} exceeds the configured cap {max_nnz}")

    two_j = basis.two_j_eff
    G = model.G
    diag = diagonal_elements(model, basis)

    rows = list(range(dim))
    cols = list(range(dim))
    vals = list(diag)

    coupled = [
        (p, q)
        for p in range(k)
        for q in range(p + 1, k)
        if G[p, q] != 0.0
    ]
    two_m_rows = basis.two_m.tolist()
    for i, tm in enumerate(two_m_rows):
        for p, q in coupled:
            if tm[p] >= two_j[p] or tm[q] <= -two_j[q]:
                continue
            target = list(tm)
            target[p] += 2
            target[q] -= 2
            t = basis.position(tuple(target))
            num_p = (two_j[p] - tm[p]) * (two_j[p] + tm[p] + 2)
            num_q = (two_j[q] + tm[q]) * (two_j[q] - tm[q] + 2)
            rows.append(i)
            cols.append(t)
            vals.append(-G[p, q] * math.sqrt(num_p * num_q) / 4.0)

    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("Hamiltonian entries must be finite")
    upper = sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return SymmetricOperatorMatrix(upper=upper)


def single_level_spectrum(j: float, epsilon: float, G: float) -> np.ndarray:
    """Closed-form single-level energies E(n) = 2 eps n - G n (2j - n + 1).

    Indexed by the pair count n = 0 .. 2j; the analytic oracle for k = 1.
    """
    tj = _twice(j, "j")
    if tj <= 0:
        raise ValueError("j must be positive")
    n = np.arange(tj + 1, dtype=float)
    return 2.0 * epsilon * n - G * n * (tj - n + 1.0)
