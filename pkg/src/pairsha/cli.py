"""Command-line front end: exact, oscillator, subspace, sweep and compare runs.

Models come from JSON config files (see `pairsha.model.parse_model_config`
for the grammar). CSV output uses a header row, comma delimiter and 12
significant digits, and is byte-identical across repeated runs of the same
configuration. Exit codes: 0 success, 2 configuration error, 3 numerical
failure (no convergence or an invalid oscillator regime).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import eig, sha, subspace
from .errors import InvalidRegime, NonConvergence
from .hamiltonian import build_hamiltonian
from .model import enumerate_basis, parse_model_config
from .subspace import SubspaceSpec

COMMANDS = ("exact", "sha", "subspace", "sweep", "compare")


def _fmt(value) -> str:
    return f"{float(value):.12g}"


def _write_lines(out_path, lines) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _parse_sweep(arg: str):
    parts = arg.split(":")
    if len(parts) != 3:
        raise ValueError("--sweep expects start:stop:steps")
    start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("sweep needs steps >= 1")
    if steps > 1 and not stop > start:
        raise ValueError("sweep grid must be strictly increasing")
    return np.linspace(start, stop, steps)


def _parse_subspace_spec(args) -> SubspaceSpec:
    if args.subspace is None:
        raise ValueError("this command needs --subspace kind[:n]")
    kind, _, size_str = args.subspace.partition(":")
    if kind == "su2-states":
        if not size_str:
            raise ValueError("su2-states needs a size, e.g. --subspace su2-states:50")
        return SubspaceSpec(kind=kind, size=int(size_str), rank=args.rank)
    if kind == "sha-vectors":
        quanta_max = args.quanta_max
        if size_str:
            if quanta_max is not None and quanta_max != int(size_str):
                raise ValueError("--subspace sha-vectors:n conflicts with --quanta-max")
            quanta_max = int(size_str)
        return SubspaceSpec(kind=kind, quanta_max=quanta_max, rank=args.rank)
    raise ValueError(f"unknown subspace kind {kind!r}")


def _quanta_label(nu) -> str:
    return "-".join(str(int(n)) for n in nu)


def cmd_exact(model, args) -> int:
    basis = enumerate_basis(model)
    matrix = build_hamiltonian(model, basis)
    count = min(args.count, basis.dimension)
    result = eig.diagonalize(matrix, count=count, want_vectors=False)
    ground = result.eigenvalues[0]
    lines = ["index,energy,excitation"]
    for i, energy in enumerate(result.eigenvalues):
        lines.append(f"{i},{_fmt(energy)},{_fmt(energy - ground)}")
    _write_lines(args.out, lines)
    return 0


def _sha_chain(model):
    shift = sha.solve_shifts(model)
    tensors = sha.build_tensors(model, shift)
    reduced = sha.remove_spurious(tensors)
    modes = sha.normal_modes(
        reduced.A, reduced.B, reduced.basis, tensors.E, origin=model.j_eff * shift.x0
    )
    return shift, tensors, modes


def cmd_sha(model, args) -> int:
    shift, tensors, modes = _sha_chain(model)
    quanta_max = args.quanta_max if args.quanta_max is not None else subspace.DEFAULT_QUANTA_MAX
    quanta = subspace.quanta_cutoff_set(modes.n_modes, quanta_max)
    energies = sha.sha_energies(modes, quanta)
    order = np.argsort(energies, kind="stable")

    ground = modes.ground_energy
    csv_lines = ["quanta,energy,excitation"]
    level_entries = []
    for idx in order:
        nu = quanta[idx]
        csv_lines.append(
            f"{_quanta_label(nu)},{_fmt(energies[idx])},{_fmt(energies[idx] - ground)}"
        )
        level_entries.append(
            {
                "quanta": [int(n) for n in nu],
                "energy": float(energies[idx]),
                "excitation": float(energies[idx] - ground),
            }
        )

    report = {
        "method": shift.method,
        "x0": shift.x0.tolist(),
        "lambda": shift.lam,
        "kappa": shift.kappa.tolist(),
        "omega": modes.omega.tolist(),
        "sigma": modes.sigma.tolist(),
        "alpha": modes.alpha.tolist(),
        "beta": modes.beta.tolist(),
        "energy_offset": tensors.E,
        "ground_energy": ground,
        "shift_residual": shift.residual,
        "quanta_max": quanta_max,
        "levels": level_entries,
    }
    if args.out is None:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        out = Path(args.out)
        _write_lines(out, csv_lines)
        out.with_suffix(".json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        sha.write_diagnostics(Path(str(out.with_suffix("")) + ".diag.txt"), shift, tensors, modes)
    return 0


def cmd_subspace(model, args) -> int:
    spec = _parse_subspace_spec(args)
    basis = enumerate_basis(model)
    matrix = build_hamiltonian(model, basis)
    result = subspace.run_subspace(model, spec, basis=basis, matrix=matrix)
    values = result.spectrum.eigenvalues
    count = min(args.count, len(values))
    ground = values[0]
    lines = ["index,energy,excitation"]
    for i in range(count):
        lines.append(f"{i},{_fmt(values[i])},{_fmt(values[i] - ground)}")
    _write_lines(args.out, lines)
    print(f"subspace size used: {result.subspace_size}", file=sys.stderr)
    return 0


def cmd_sweep(config, args) -> int:
    if args.sweep is None:
        raise ValueError("sweep needs --sweep start:stop:steps")
    grid = _parse_sweep(args.sweep)
    first = parse_model_config(config, g_override=float(grid[0]))
    basis = enumerate_basis(first)
    n_modes = first.k - 1

    labels = [
        "sha_" + "".join("1" if t == i else "0" for t in range(n_modes))
        for i in range(n_modes)
    ]
    if n_modes >= 1:
        labels.append("sha_2" + "0" * (n_modes - 1))
    n_exact = min(4, basis.dimension - 1)

    def point(g: float):
        model_g = parse_model_config(config, g_override=float(g))
        sha_cols = [float("nan")] * len(labels)
        try:
            shift = sha.solve_shifts(model_g)
            modes = sha.compute_normal_modes(model_g, shift)
            sha_cols = list(modes.omega)
            if n_modes >= 1:
                sha_cols.append(2.0 * modes.omega[0])
        except (InvalidRegime, NonConvergence):
            pass
        matrix = build_hamiltonian(model_g, basis)
        spectrum = eig.diagonalize(matrix, count=n_exact + 1, want_vectors=False)
        exact_cols = list(spectrum.excitations[1 : n_exact + 1])
        return sha_cols + exact_cols

    with ThreadPoolExecutor(max_workers=min(4, len(grid))) as pool:
        rows = list(pool.map(point, grid))

    header = ["g"] + labels + [f"exact_{i+1}" for i in range(n_exact)]
    lines = [",".join(header)]
    for g, row in zip(grid, rows):
        lines.append(",".join([_fmt(g)] + [_fmt(v) for v in row]))
    _write_lines(args.out, lines)
    return 0


def cmd_compare(model, args) -> int:
    spec = _parse_subspace_spec(args)
    basis = enumerate_basis(model)
    matrix = build_hamiltonian(model, basis)
    count = min(args.count, basis.dimension)
    exact = eig.diagonalize(matrix, count=count, want_vectors=True)
    sub = subspace.run_subspace(model, spec, basis=basis, matrix=matrix, exact=exact)

    _, _, modes = _sha_chain(model)
    quanta_max = args.quanta_max if args.quanta_max is not None else subspace.DEFAULT_QUANTA_MAX
    quanta = subspace.quanta_cutoff_set(modes.n_modes, quanta_max)
    sha_exc = sha.sha_excitations(modes, quanta)
    order = np.argsort(sha_exc, kind="stable")

    rows = min(count, len(sub.spectrum.eigenvalues), len(order))
    lines = ["index,exact_excitation,subspace_excitation,sha_excitation,sha_quanta,overlap"]
    for i in range(rows):
        overlap = sub.overlaps[i] if sub.overlaps is not None and i < len(sub.overlaps) else float("nan")
        lines.append(
            ",".join(
                [
                    str(i),
                    _fmt(exact.excitations[i]),
                    _fmt(sub.spectrum.excitations[i]),
                    _fmt(sha_exc[order[i]]),
                    _quanta_label(quanta[order[i]]),
                    _fmt(overlap),
                ]
            )
        )
    _write_lines(args.out, lines)
    print(f"subspace size used: {sub.subspace_size}", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairsha",
        description="Pairing-Hamiltonian spectra: exact, shifted-oscillator and subspace runs.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON model config")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--g", type=float, help="override the coupling strength of a rule config")
    parser.add_argument("--sweep", help="coupling grid start:stop:steps (sweep command)")
    parser.add_argument("--subspace", help="subspace spec kind[:n], kinds: sha-vectors, su2-states")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--quanta-max", type=int, help="total-quanta cutoff (default 10)")
    parser.add_argument(
        "--rank",
        choices=subspace.RANKING_RULES,
        default="diagonal-energy",
        help="ranking rule for su2-states subspaces",
    )
    parser.add_argument("--count", type=int, default=6, help="number of reported levels")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.count < 1:
            raise ValueError("--count must be >= 1")
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if args.command == "sweep":
            if args.g is not None:
                raise ValueError("--g conflicts with --sweep; the sweep sets g per point")
            return cmd_sweep(config, args)
        model = parse_model_config(config, g_override=args.g)
        if args.command == "exact":
            return cmd_exact(model, args)
        if args.command == "sha":
            return cmd_sha(model, args)
        if args.command == "subspace":
            return cmd_subspace(model, args)
        return cmd_compare(model, args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvalidRegime, NonConvergence, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
