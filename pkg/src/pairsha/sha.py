"""Shifted-oscillator analysis of the pairing Hamiltonian.

Treating the discrete projections m_p as continuous variables x_p = m_p/j_p
and expanding around an equilibrium point x0 maps the pairing Hamiltonian,
up to bilinear terms, onto a shifted k-dimensional coupled oscillator

    H ~ -d/dxi A d/dxi + xi B xi + sum_p D_p xi_p + E,   xi_p = j_p (x_p - x0_p),

with inverse-mass tensor A, spring-constant tensor B, shifts D and constant
E, all built from kappa_p = 1 - x0_p^2 and T_pq = G_pq j_p j_q
sqrt(kappa_p kappa_q):

    A_pq = delta_pq sum_r T_pr - T_pq
    B_pq = delta_pq sum_r T_pr / (j_p kappa_p)^2 - T_pq x0_p x0_q / (j_p j_q kappa_p kappa_q)
    D_p  = 2 eps_p - G_pp + (2 x0_p / (j_p kappa_p)) sum_r T_pr
    E    = sum_p j_p (2 eps_p - G_pp)(1 + x0_p) - sum_pq T_pq   (+ seniority offset)

The equilibrium is the minimum of the oscillator potential on the fixed-N
hyperplane sum_p xi_p = 0: all shift functions equal a common value,
D_p = 2 lambda, with lambda the chemical-potential analogue, together with
the pair-number constraint sum_p j_p (1 + x0_p) = N. Half of (x0_p + 1) is
the mean fractional occupancy of level p, so these are the number-conserving
analogue of the BCS gap equations.

A annihilates the direction (1, ..., 1), so the dynamics is confined to the
(k-1)-dimensional hyperplane; projecting A and B onto it and splitting the
result into decoupled modes gives frequencies omega_i = 2 sqrt(alpha_i beta_i)
and widths sigma_i = (alpha_i / beta_i)^(1/4), the spectrum
E_nu = sum_i (nu_i + 1/2) omega_i + E, and Hermite-Gaussian eigenfunctions
that can be sampled on the discrete basis grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.hermite import hermval
from scipy.optimize import minimize

from .errors import InvalidRegime, NonConvergence
from .model import PairingModel

SHIFT_TOL = 1e-12
MAX_NEWTON_ITER = 200
NEWTON_RESTARTS = 20
_RESTART_SEED = 7


@dataclass(frozen=True, eq=False)
class ShiftSolution:
    """Equilibrium shifts x0 with the derived kappa and T tensors.

    `lam` is the common value D_p / 2 at the solution. `method` records
    whether the full stationarity system was solved ("newton") or the
    constrained least-squares fallback was used ("least-squares");
    `residual` is max_p |D_p - 2 lam| at the returned point.
    """

    x0: np.ndarray
    lam: float
    kappa: np.ndarray
    T: np.ndarray
    method: str
    residual: float


@dataclass(frozen=True, eq=False)
class OscillatorTensors:
    """Inverse-mass tensor A, spring tensor B, shifts D and offset E."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    E: float


@dataclass(frozen=True, eq=False)
class HyperplaneReduction:
    """A and B projected onto the fixed-N hyperplane, plus its orthonormal basis.

    `basis` has shape (k, k-1); its columns span {xi : sum_p xi_p = 0}.
    """

    A: np.ndarray
    B: np.ndarray
    basis: np.ndarray


@dataclass(frozen=True, eq=False)
class NormalModes:
    """Decoupled oscillator data on the fixed-N hyperplane.

    `mode_vectors` rows map hyperplane displacements xi (in m-space,
    xi_p = m_p - j_p x0_p) to mode coordinates; they are unit rows orthogonal
    to (1, ..., 1), ordered by ascending omega with the first significant
    component positive. `origin` is the point j_eff * x0 on the m grid and is
    set when the modes are built through `compute_normal_modes`.
    """

    mode_vectors: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    energy_offset: float
    origin: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.omega.shape[0]

    @property
    def ground_energy(self) -> float:
        return self.energy_offset + 0.5 * float(self.omega.sum())


def _require_paired_levels(model: PairingModel) -> None:
    if np.any(model.two_j_eff == 0):
        raise ValueError(
            "levels with zero effective quasi-spin carry no pairs; "
            "drop them from the model before the oscillator analysis"
        )


def _shift_functions(model: PairingModel, x: np.ndarray):
    """Shift functions D_p(x) and the gap-like sums Delta_p = sum_r G_pr j_r s_r."""
    j = model.j_eff
    s = np.sqrt(1.0 - x * x)
    delta = model.G @ (j * s)
    D = 2.0 * model.epsilon - np.diag(model.G) + 2.0 * (x / s) * delta
    return D, delta, s


def _shift_jacobian(model: PairingModel, x, delta, s) -> np.ndarray:
    """Analytic Jacobian dD_p/dx_q.

    d(x/s)/dx = 1/s^3 and dDelta_p/dx_q = -G_pq j_q x_q / s_q give
    dD_p/dx_q = 2 delta_pq Delta_p / s_p^3 - 2 x_p x_q G_pq j_q / (s_p s_q).
    """
    j = model.j_eff
    JD = -2.0 * np.outer(x / s, x / s) * model.G * j[None, :]
    JD[np.diag_indices_from(JD)] += 2.0 * delta / s**3
    return JD


def _energy_scale(model: PairingModel) -> float:
    return max(1.0, float(np.abs(2.0 * model.epsilon - np.diag(model.G)).max()))


def solve_shifts(
    model: PairingModel,
    *,
    tol: float = SHIFT_TOL,
    max_iter: int = MAX_NEWTON_ITER,
    restarts: int = NEWTON_RESTARTS,
    seed: int = _RESTART_SEED,
) -> ShiftSolution:
    """Solve D_p(x0) = 2 lambda plus the pair-number constraint by damped Newton.

    Unknowns are (x0_1 .. x0_k, lambda). The initial guess is the uniform
    fractional occupancy x0_p = N / sum_q j_q - 1; on failure up to `restarts`
    random interior starts are tried. Convergence requires
    max_p |D_p - 2 lambda| <= tol * max(1, max_p |2 eps_p - G_pp|) and
    |sum_p j_p (1 + x0_p) - N| <= tol * max(1, N_max).

    Raises InvalidRegime when iterates are pushed against x = +-1 or the
    Jacobian is singular on every attempt (no interior stationary point, the
    weak-coupling signature), and NonConvergence when the iteration budget
    runs out.
    """
    _require_paired_levels(model)
    j = model.j_eff
    N = float(model.N)
    d_scale = tol * _energy_scale(model)
    n_scale = tol * max(1.0, float(model.max_pairs))

    uniform = np.full(model.k, N / float(j.sum()) - 1.0)
    uniform = np.clip(uniform, -1.0 + 1e-3, 1.0 - 1e-3)
    rng = np.random.default_rng(seed)
    guesses = [uniform] + [rng.uniform(-0.9, 0.9, model.k) for _ in range(restarts)]

    ran_out = False
    last_error: Exception | None = None
    for guess in guesses:
        try:
            x, lam, residual = _newton_attempt(model, guess, d_scale, n_scale, max_iter)
        except NonConvergence as exc:
            ran_out = True
            last_error = exc
            continue
        except InvalidRegime as exc:
            last_error = exc
            continue
        kappa = 1.0 - x * x
        sk = j * np.sqrt(kappa)
        return ShiftSolution(
            x0=x,
            lam=lam,
            kappa=kappa,
            T=model.G * np.outer(sk, sk),
            method="newton",
            residual=residual,
        )

    if ran_out:
        raise NonConvergence(
            f"shift equations not converged in {max_iter} iterations "
            f"({restarts} restarts): {last_error}"
        )
    raise InvalidRegime(
        f"no interior stationary point found ({restarts} restarts): {last_error}"
    )


def _newton_attempt(model, x0_guess, d_scale, n_scale, max_iter):
    j = model.j_eff
    N = float(model.N)
    x = np.asarray(x0_guess, dtype=float).copy()
    D, delta, s = _shift_functions(model, x)
    lam = 0.5 * float(D.mean())

    for _ in range(max_iter):
        F = np.concatenate([D - 2.0 * lam, [j @ (1.0 + x) - N]])
        if np.abs(F[:-1]).max() <= d_scale and abs(F[-1]) <= n_scale:
            return x, lam, float(np.abs(D - 2.0 * lam).max())

        k = model.k
        jac = np.zeros((k + 1, k + 1))
        jac[:k, :k] = _shift_jacobian(model, x, delta, s)
        jac[:k, k] = -2.0
        jac[k, :k] = j
        try:
            step = np.linalg.solve(jac, -F)
        except np.linalg.LinAlgError:
            raise InvalidRegime("singular Jacobian in the shift equations") from None

        # shrink until the iterate stays strictly inside (-1, 1)
        t = 1.0
        while not np.all(np.abs(x + t * step[:k]) < 1.0):
            t *= 0.5
            if t < 1e-13:
                raise InvalidRegime("shift iterate pushed against x = +-1")
        norm0 = np.linalg.norm(F)
        while t >= 1e-13:
            xn = x + t * step[:k]
            lamn = lam + t * step[k]
            Dn, deltan, sn = _shift_functions(model, xn)
            Fn = np.concatenate([Dn - 2.0 * lamn, [j @ (1.0 + xn) - N]])
            if np.linalg.norm(Fn) < norm0:
                break
            t *= 0.5
        else:
            raise InvalidRegime("no descent step inside the unit box")
        x, lam, D, delta, s = xn, lamn, Dn, deltan, sn

    raise NonConvergence("Newton iteration cap reached")


def solve_shifts_least_squares(model: PairingModel) -> ShiftSolution:
    """Constraint-only fallback: minimize the spread of the shift functions.

    Minimizes sum_p (D_p - mean D)^2 subject to sum_p j_p (1 + x_p) = N over
    the open box |x_p| < 1, with lambda = mean(D)/2 at the minimizer. Used for
    state selection when the full stationarity system has no interior
    solution; this choice of fallback is a documented convention, and for a
    coupling-free model it reduces to the uniform constraint-satisfying point.
    """
    _require_paired_levels(model)
    j = model.j_eff
    N = float(model.N)

    def objective(x):
        D, delta, s = _shift_functions(model, x)
        r = D - D.mean()
        grad = 2.0 * (_shift_jacobian(model, x, delta, s).T @ r)
        return float(r @ r), grad

    x_start = np.clip(np.full(model.k, N / float(j.sum()) - 1.0), -1.0 + 1e-6, 1.0 - 1e-6)
    margin = 1e-12
    result = minimize(
        objective,
        x_start,
        jac=True,
        method="SLSQP",
        bounds=[(-1.0 + margin, 1.0 - margin)] * model.k,
        constraints=[{"type": "eq", "fun": lambda x: j @ (1.0 + x) - N, "jac": lambda x: j}],
        options={"maxiter": 500, "ftol": 1e-14},
    )
    x = np.asarray(result.x, dtype=float)
    if abs(j @ (1.0 + x) - N) > 1e-9 * max(1.0, model.max_pairs):
        raise NonConvergence(f"fallback minimizer left the constraint: {result.message}")

    D, _, _ = _shift_functions(model, x)
    lam = 0.5 * float(D.mean())
    kappa = 1.0 - x * x
    sk = j * np.sqrt(kappa)
    return ShiftSolution(
        x0=x,
        lam=lam,
        kappa=kappa,
        T=model.G * np.outer(sk, sk),
        method="least-squares",
        residual=float(np.abs(D - 2.0 * lam).max()),
    )


def solve_shifts_with_fallback(model: PairingModel, **kwargs) -> ShiftSolution:
    """Full shift solve, falling back to the constrained least-squares point."""
    try:
        return solve_shifts(model, **kwargs)
    except (InvalidRegime, NonConvergence):
        return solve_shifts_least_squares(model)


def build_tensors(model: PairingModel, shift: ShiftSolution) -> OscillatorTensors:
    """Oscillator tensors A, B, D, E at the given equilibrium point."""
    j = model.j_eff
    x = shift.x0
    kappa = shift.kappa
    T = shift.T
    row = T.sum(axis=1)

    A = np.diag(row) - T
    B = np.diag(row / (j * kappa) ** 2) - T * np.outer(x / (j * kappa), x / (j * kappa))
    D = 2.0 * model.epsilon - np.diag(model.G) + 2.0 * x / (j * kappa) * row
    E = float(
        (j * (2.0 * model.epsilon - np.diag(model.G)) * (1.0 + x)).sum()
        - T.sum()
        + model.seniority_energy_offset
    )
    return OscillatorTensors(A=A, B=B, D=D, E=E)


def hyperplane_basis(k: int) -> np.ndarray:
    """Orthonormal basis of {xi : sum_p xi_p = 0} as columns of a (k, k-1) matrix.

    Helmert construction: column i is (1, ..., 1, -i, 0, ..., 0)/sqrt(i(i+1))
    with i leading ones, so the result is deterministic and exactly orthogonal
    to the spurious direction (1, ..., 1).
    """
    W = np.zeros((k, k - 1))
    for i in range(1, k):
        W[:i, i - 1] = 1.0
        W[i, i - 1] = -float(i)
        W[:, i - 1] /= math.sqrt(i * (i + 1))
    return W


def remove_spurious(tensors: OscillatorTensors) -> HyperplaneReduction:
    """Project A and B onto the fixed-N hyperplane, dropping the spurious mode.

    The input A must annihilate (1, ..., 1) (zero row sums); the projected A
    must be positive definite, otherwise the oscillator picture has broken
    down and InvalidRegime is raised.
    """
    A = tensors.A
    k = A.shape[0]
    norm_a = float(np.linalg.norm(A, 2)) if k > 1 else 0.0
    spurious = np.ones(k)
    if k > 1 and np.abs(A @ spurious).max() > 1e-12 * max(norm_a, 1e-300):
        raise ValueError("inverse-mass tensor does not annihilate the spurious direction")

    W = hyperplane_basis(k)
    Ar = W.T @ A @ W
    Br = W.T @ tensors.B @ W
    Ar = 0.5 * (Ar + Ar.T)
    Br = 0.5 * (Br + Br.T)
    if k > 1:
        lo = float(np.linalg.eigvalsh(Ar).min())
        if lo <= 1e-12 * norm_a:
            raise InvalidRegime(
                f"projected inverse-mass tensor not positive definite (min eig {lo:.3e})"
            )
    return HyperplaneReduction(A=Ar, B=Br, basis=W)


def normal_modes(
    restricted_a: np.ndarray,
    restricted_b: np.ndarray,
    basis: np.ndarray,
    energy_offset: float,
    origin: np.ndarray | None = None,
) -> NormalModes:
    """Split the hyperplane oscillator into decoupled modes.

    The kinetic tensor is whitened by A^(1/2) and the transformed potential
    diagonalized; this fixes alpha_i * beta_i. The remaining per-mode scale is
    set by normalizing each mode vector (the row mapping xi to the mode
    coordinate) to unit length, which makes a 1-d problem with scalar tensors
    a, b come out as alpha = a, beta = b, sigma = (a/b)^(1/4). Modes are
    ordered by ascending omega, ties broken by lexicographic mode vector, and
    each vector's first significant component is made positive.
    """
    Ar = np.asarray(restricted_a, dtype=float)
    Br = np.asarray(restricted_b, dtype=float)
    nm = Ar.shape[0]
    k = basis.shape[0]
    if nm == 0:
        empty = np.zeros(0)
        return NormalModes(
            mode_vectors=np.zeros((0, k)),
            omega=empty,
            sigma=empty.copy(),
            alpha=empty.copy(),
            beta=empty.copy(),
            energy_offset=float(energy_offset),
            origin=None if origin is None else np.asarray(origin, dtype=float),
        )

    a_eigs, Q = np.linalg.eigh(Ar)
    if a_eigs.min() <= 0.0:
        raise InvalidRegime("restricted inverse-mass tensor must be positive definite")
    inv_sqrt = Q @ np.diag(1.0 / np.sqrt(a_eigs)) @ Q.T
    sqrt_a = Q @ np.diag(np.sqrt(a_eigs)) @ Q.T

    C = sqrt_a @ Br @ sqrt_a
    C = 0.5 * (C + C.T)
    gamma, U = np.linalg.eigh(C)
    if gamma.min() <= 0.0:
        raise InvalidRegime(
            f"hyperplane potential not positive definite (min eig {gamma.min():.3e})"
        )

    rows = U.T @ inv_sqrt @ basis.T
    scale = np.linalg.norm(rows, axis=1)
    vectors = rows / scale[:, None]
    alpha = 1.0 / scale**2
    beta = gamma * scale**2
    omega = 2.0 * np.sqrt(alpha * beta)
    sigma = (alpha / beta) ** 0.25

    for i in range(nm):
        row = vectors[i]
        lead = np.flatnonzero(np.abs(row) > 1e-12 * np.abs(row).max())[0]
        if row[lead] < 0:
            vectors[i] = -row

    order = sorted(range(nm), key=lambda i: (omega[i], tuple(vectors[i])))
    return NormalModes(
        mode_vectors=vectors[order],
        omega=omega[order],
        sigma=sigma[order],
        alpha=alpha[order],
        beta=beta[order],
        energy_offset=float(energy_offset),
        origin=None if origin is None else np.asarray(origin, dtype=float),
    )


def compute_normal_modes(model: PairingModel, shift: ShiftSolution) -> NormalModes:
    """Full chain tensors -> spurious-mode removal -> normal modes.

    Also records the m-grid origin j_eff * x0 on the result so wavefunctions
    can be sampled directly at basis states.
    """
    tensors = build_tensors(model, shift)
    reduced = remove_spurious(tensors)
    return normal_modes(
        reduced.A, reduced.B, reduced.basis, tensors.E, origin=model.j_eff * shift.x0
    )


def _quanta_array(modes: NormalModes, quanta) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(quanta, dtype=np.int64))
    if arr.shape[1] != modes.n_modes and not (modes.n_modes == 0 and arr.size == 0):
        raise ValueError(f"quanta must have {modes.n_modes} entries per mode set")
    if arr.size and arr.min() < 0:
        raise ValueError("quanta must be non-negative")
    return arr


def sha_energies(modes: NormalModes, quanta) -> np.ndarray:
    """Oscillator energies E_nu = sum_i (nu_i + 1/2) omega_i + E for each quanta set."""
    arr = _quanta_array(modes, quanta)
    return arr @ modes.omega + modes.ground_energy


def sha_excitations(modes: NormalModes, quanta) -> np.ndarray:
    """Excitation energies sum_i nu_i omega_i, exactly harmonic by construction."""
    return _quanta_array(modes, quanta) @ modes.omega


def sha_wavefunction_xi(modes: NormalModes, quanta, xi) -> np.ndarray:
    """Oscillator eigenfunction evaluated at hyperplane displacements xi.

    xi has shape (..., k); the value is the product over modes of normalized
    Hermite-Gaussian factors

        (2^nu_i sigma_i nu_i! sqrt(pi))^(-1/2) H_nu_i(z_i) exp(-z_i^2 / 2),

    z_i = (mode_vectors[i] . xi) / sigma_i. Any discrete-grid normalization is
    applied by the caller (the sampled vector over a basis is normalized to
    unit norm there).
    """
    nu = tuple(int(n) for n in quanta)
    if len(nu) != modes.n_modes:
        raise ValueError(f"expected {modes.n_modes} quanta, got {len(nu)}")
    if any(n < 0 for n in nu):
        raise ValueError("quanta must be non-negative")

    xi = np.asarray(xi, dtype=float)
    zeta = xi @ modes.mode_vectors.T
    values = np.ones(zeta.shape[:-1])
    for i, n in enumerate(nu):
        z = zeta[..., i] / modes.sigma[i]
        norm = math.sqrt(2.0**n * modes.sigma[i] * math.factorial(n) * math.sqrt(math.pi))
        values = values * hermval(z, [0.0] * n + [1.0]) * np.exp(-0.5 * z * z) / norm
    return values


def sha_wavefunction(modes: NormalModes, quanta, m_points) -> np.ndarray:
    """Oscillator eigenfunction at m-grid points (shape (..., k))."""
    if modes.origin is None:
        raise ValueError(
            "modes carry no grid origin; build them with compute_normal_modes "
            "or evaluate at xi displacements directly"
        )
    m_points = np.asarray(m_points, dtype=float)
    return sha_wavefunction_xi(modes, quanta, m_points - modes.origin)


def _format_block(fh, label, array):
    arr = np.atleast_2d(np.asarray(array, dtype=float))
    fh.write(f"{label}\n")
    for row in arr:
        fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def write_diagnostics(path, shift: ShiftSolution, tensors: OscillatorTensors, modes: NormalModes) -> None:
    """Dump x0, lambda, A, B, D, E, omega, sigma as text at 17 significant digits."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write(f"method {shift.method}\n")
        fh.write(f"shift_residual {shift.residual:.17g}\n")
        _format_block(fh, "x0", shift.x0)
        fh.write(f"lambda {shift.lam:.17g}\n")
        _format_block(fh, "kappa", shift.kappa)
        _format_block(fh, "A", tensors.A)
        _format_block(fh, "B", tensors.B)
        _format_block(fh, "D", tensors.D)
        fh.write(f"E {tensors.E:.17g}\n")
        _format_block(fh, "omega", modes.omega)
        _format_block(fh, "sigma", modes.sigma)
