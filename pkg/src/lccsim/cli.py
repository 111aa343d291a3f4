"""Command-line front end: reproducible runs of the simulator pipelines.

Subcommands: lcc, kak, protocol, tomography.  All stochastic commands
require --seed; identical inputs and seed produce byte-identical output.

Exit codes: 0 success, 2 parse failure, 3 precondition violation,
4 dimension mismatch, 5 unknown name.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gates, kak, lcc, protocol, qcore, tomography
from .qcore import DimensionMismatchError, InvalidInputError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_DIMENSION = 4
EXIT_UNKNOWN_NAME = 5


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt_complex(z: complex) -> str:
    return f"{z.real:+.12f}{z.imag:+.12f}j"


def _emit(lines: list[str], args) -> None:
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _CliError(EXIT_PARSE, f"cannot read {path}: {exc}") from None


def _require_seed(args) -> np.random.Generator:
    if args.seed is None:
        raise _CliError(EXIT_PRECONDITION, "this subcommand requires --seed")
    return np.random.default_rng(args.seed)


def cmd_lcc(args) -> int:
    try:
        spec, input_state = lcc.spec_from_json(_read_file(args.spec),
                                               gate_registry=gates.GATES)
    except InvalidInputError as exc:
        if "unknown gate name" in str(exc):
            raise _CliError(EXIT_UNKNOWN_NAME, str(exc)) from None
        raise _CliError(EXIT_PARSE, f"invalid spec: {exc}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _CliError(EXIT_PARSE, f"invalid spec: {exc}") from None
    if input_state is None:
        input_state = qcore.basis_state((spec.d,), (0,))
    if input_state.total_dim != spec.d:
        raise _CliError(EXIT_DIMENSION,
                        f"input dimension {input_state.total_dim} != gate "
                        f"dimension {spec.d}")
    result = lcc.run_lcc(spec, input_state)
    direct = spec.combination() @ input_state.data
    nrm = np.linalg.norm(direct)
    if nrm > 1e-300 and not result.output_state.data.size == 0:
        residual = qcore.vector_phase_distance(result.output_state.data,
                                               direct / nrm)
    else:
        residual = float("nan")
    lines = ["# lcc run report",
             f"terms={spec.n} dimension={spec.d} all_unitary={int(spec.all_unitary)}",
             f"success_probability={result.success_probability:.12f}",
             f"residual_vs_direct_combination={residual:.3e}",
             "# output state amplitudes"]
    lines += [_fmt_complex(z) for z in result.output_state.data]
    _emit(lines, args)
    return EXIT_OK


def _kak_report(u: np.ndarray, label: str) -> list[str]:
    dec = kak.kak_decompose(u)
    residual = qcore.phase_aligned_distance(dec.reconstruct(), u)
    lines = [f"# kak decomposition: {label}",
             "k_vector=" + " ".join(f"{v:+.12f}" for v in dec.k_vector),
             "alphas=" + " ".join(_fmt_complex(a) for a in dec.alphas),
             f"global_phase={dec.global_phase:+.12f}",
             f"residual={residual:.3e}"]
    for name, m in (("u1", dec.u1), ("v1", dec.v1),
                    ("u2", dec.u2), ("v2", dec.v2)):
        lines.append(f"# local {name}")
        for row in m:
            lines.append(" ".join(_fmt_complex(z) for z in row))
    return lines


def cmd_kak(args) -> int:
    if args.random is not None:
        rng = _require_seed(args)
        residuals = []
        lines = [f"# kak random batch: count={args.random} seed={args.seed}"]
        for i in range(args.random):
            u = qcore.haar_random_unitary(4, rng)
            dec = kak.kak_decompose(u)
            r = qcore.phase_aligned_distance(dec.reconstruct(), u)
            residuals.append(r)
            lines.append(f"sample={i} residual={r:.3e}")
        lines.append(f"max_residual={max(residuals):.3e}")
        _emit(lines, args)
        return EXIT_OK
    if args.matrix is None:
        raise _CliError(EXIT_PARSE, "kak requires a matrix file or --random N")
    try:
        u = qcore.parse_matrix(_read_file(args.matrix))
    except (InvalidInputError, ValueError) as exc:
        raise _CliError(EXIT_PARSE, f"invalid matrix file: {exc}") from None
    if u.shape != (4, 4):
        raise _CliError(EXIT_DIMENSION, f"expected a 4x4 matrix, got {u.shape}")
    if not qcore.is_unitary(u, atol=1e-9):
        raise _CliError(EXIT_PRECONDITION, "matrix is not unitary")
    _emit(_kak_report(u, args.matrix), args)
    return EXIT_OK


def _load_scenario(path: str) -> dict:
    try:
        doc = json.loads(_read_file(path))
    except json.JSONDecodeError as exc:
        raise _CliError(EXIT_PARSE, f"invalid scenario file: {exc}") from None
    for key in ("operation", "epsilon", "tau", "rounds"):
        if key not in doc:
            raise _CliError(EXIT_PARSE, f"scenario missing field {key!r}")
    return doc


def cmd_protocol(args) -> int:
    doc = _load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else doc.get("seed")
    if seed is None:
        raise _CliError(EXIT_PRECONDITION, "protocol runs require a seed")
    rng = np.random.default_rng(int(seed))

    op_name = doc["operation"]
    if op_name not in gates.COMBINATIONS:
        raise _CliError(EXIT_UNKNOWN_NAME, f"unknown operation {op_name!r}")
    spec = gates.combination_spec(op_name)

    if "input_state" in doc:
        amps = np.array([complex(re, im) for re, im in doc["input_state"]])
        input_state = qcore.statevector(amps)
    else:
        input_state = qcore.basis_state((spec.d,), (0,))
    if input_state.total_dim != spec.d:
        raise _CliError(EXIT_DIMENSION,
                        f"input dimension {input_state.total_dim} != gate "
                        f"dimension {spec.d}")

    control = np.array(spec.coefficients, dtype=complex)
    try:
        policy = protocol.SendPolicy(epsilon=float(doc["epsilon"]),
                                     tau=float(doc["tau"]),
                                     control_rho=np.outer(control, control.conj()))
        behavior = protocol.ServerBehavior(
            mode=doc.get("behavior", "honest"),
            intercept_fraction=float(doc.get("intercept_fraction", 0.0)),
            intercept_basis=doc.get("intercept_basis", "x"))
    except InvalidInputError as exc:
        raise _CliError(EXIT_PRECONDITION, str(exc)) from None

    rounds = int(doc["rounds"])
    transcript = protocol.run_session(spec, input_state, policy, behavior,
                                      rounds, rng)
    analytic = protocol.success_probability_account(spec)
    detect_rate = protocol.intercept_detection_rate(spec, input_state,
                                                    policy, behavior)
    s = transcript.summary()
    lines = [f"# protocol session: operation={op_name} rounds={rounds} seed={seed}",
             f"# p_compute={policy.p_control:.12f} p_decoy={policy.p_decoy:.12f} "
             f"p_basis_each={policy.p_basis:.12f}",
             f"# analytic_success_probability={analytic:.12f}",
             f"# empirical_completion={s['empirical_completion']:.12f}",
             f"# detections={s['detections']} analytic_detection_rate={detect_rate:.12f}"]
    lines.append(transcript.to_text().rstrip("\n"))
    _emit(lines, args)
    return EXIT_OK


def cmd_tomography(args) -> int:
    names = []
    for raw in _read_file(args.operations).splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            names.append(line)
    if not names:
        raise _CliError(EXIT_UNKNOWN_NAME, "operation list is empty")
    for name in names:
        if name not in gates.GATES:
            raise _CliError(EXIT_UNKNOWN_NAME, f"unknown operation {name!r}")
    analytic = args.noise == 0.0 and not args.sampled
    rng = _require_seed(args) if not analytic else None
    lines = [f"# tomography: shots={args.shots} noise={args.noise:.6f} "
             f"mode={'analytic' if analytic else 'sampled'}",
             "# name fidelity std"]
    for name in names:
        chi_true = tomography.ideal_chi(gates.gate(name))
        chi_sim = tomography.depolarize_chi(chi_true, args.noise)
        dataset = tomography.simulate_dataset(chi_sim, args.shots, rng,
                                              analytic=analytic)
        result = tomography.reconstruct_mle(dataset)
        fid = tomography.process_fidelity(result.chi, chi_true)
        if analytic or args.resamples < 2:
            std = 0.0
        else:
            _, std = tomography.bootstrap_fidelity(dataset, chi_true,
                                                   args.resamples, rng,
                                                   max_iter=2000)
        lines.append(f"{name} {fid:.6f} {std:.6f}")
    _emit(lines, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lccsim",
        description="Linear-combination remote-control protocol simulator")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (required for stochastic subcommands)")
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--format", choices=("text",), default="text",
                        help="output format")
    sub = parser.add_subparsers(dest="command", required=True)

    p_lcc = sub.add_parser("lcc", help="run a linear-combination circuit")
    p_lcc.add_argument("spec", help="JSON spec file")
    p_lcc.set_defaults(func=cmd_lcc)

    p_kak = sub.add_parser("kak", help="decompose a two-qubit unitary")
    p_kak.add_argument("matrix", nargs="?", default=None,
                       help="4x4 matrix literal file")
    p_kak.add_argument("--random", type=int, default=None, metavar="N",
                       help="decompose N Haar-random unitaries instead")
    p_kak.set_defaults(func=cmd_kak)

    p_proto = sub.add_parser("protocol", help="simulate a protocol session")
    p_proto.add_argument("scenario", help="JSON scenario file")
    p_proto.set_defaults(func=cmd_protocol)

    p_tomo = sub.add_parser("tomography", help="process-tomography pipeline")
    p_tomo.add_argument("operations", help="file listing operation names")
    p_tomo.add_argument("--shots", type=int, default=1000)
    p_tomo.add_argument("--noise", type=float, default=0.0,
                        help="depolarizing strength")
    p_tomo.add_argument("--sampled", action="store_true",
                        help="sample counts even without noise")
    p_tomo.add_argument("--resamples", type=int, default=0,
                        help="bootstrap resamples for the std column")
    p_tomo.set_defaults(func=cmd_tomography)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimensionMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except kak.DecompositionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
