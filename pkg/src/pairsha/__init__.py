"""Multi-level pairing Hamiltonians in the quasi-spin basis.

The package covers three workflows on the same model objects: exact spectra
by (sparse or dense) symmetric diagonalization, the shifted-oscillator
analysis that maps the pairing problem onto k-1 coupled harmonic modes, and
subspace-accelerated diagonalization guided by the oscillator solution.
"""

from .errors import InvalidRegime, NonConvergence
from .model import (
    DEFAULT_STATE_CAP,
    LevelSpec,
    PairingModel,
    QuasispinBasis,
    build_model,
    coupling_from_rule,
    enumerate_basis,
    load_model_config,
    parse_model_config,
)
from .hamiltonian import (
    SymmetricOperatorMatrix,
    build_hamiltonian,
    diagonal_element,
    diagonal_elements,
    ladder_factor,
    single_level_spectrum,
)
from .eig import SpectrumResult, diagonalize, ritz_diagonalize
from .sha import (
    HyperplaneReduction,
    NormalModes,
    OscillatorTensors,
    ShiftSolution,
    build_tensors,
    compute_normal_modes,
    hyperplane_basis,
    normal_modes,
    remove_spurious,
    sha_energies,
    sha_excitations,
    sha_wavefunction,
    sha_wavefunction_xi,
    solve_shifts,
    solve_shifts_least_squares,
    solve_shifts_with_fallback,
    write_diagnostics,
)
from .subspace import (
    SubspaceRunResult,
    SubspaceSpec,
    orthonormalize,
    quanta_cutoff_set,
    run_subspace,
    sample_sha_vectors,
    select_su2_states,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_STATE_CAP",
    "HyperplaneReduction",
    "InvalidRegime",
    "LevelSpec",
    "NonConvergence",
    "NormalModes",
    "OscillatorTensors",
    "PairingModel",
    "QuasispinBasis",
    "ShiftSolution",
    "SpectrumResult",
    "SubspaceRunResult",
    "SubspaceSpec",
    "SymmetricOperatorMatrix",
    "build_hamiltonian",
    "build_model",
    "build_tensors",
    "compute_normal_modes",
    "coupling_from_rule",
    "diagonal_element",
    "diagonal_elements",
    "diagonalize",
    "enumerate_basis",
    "hyperplane_basis",
    "ladder_factor",
    "load_model_config",
    "normal_modes",
    "orthonormalize",
    "parse_model_config",
    "quanta_cutoff_set",
    "remove_spurious",
    "ritz_diagonalize",
    "run_subspace",
    "sample_sha_vectors",
    "select_su2_states",
    "sha_energies",
    "sha_excitations",
    "sha_wavefunction",
    "sha_wavefunction_xi",
    "single_level_spectrum",
    "solve_shifts",
    "solve_shifts_least_squares",
    "solve_shifts_with_fallback",
    "write_diagnostics",
]
