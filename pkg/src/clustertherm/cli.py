"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 resource cap exceeded,
3 verification failure, 4 eigensolver non-convergence.  Structured output
is JSON, written to ``-o`` when given and to stdout otherwise.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clique import (
    CliqueSystem,
    apply_lambda,
    build_clique_state,
    lambda_deformation,
    readout_observable,
    thermal_readout,
)
from .errors import ClusterThermError, InputError, ResourceError
from .hamiltonian import GAP_FLOOR, PSD_FLOOR, assemble, ground_analysis
from .mbqc import (
    DEFAULT_EPSILON,
    ClusterLayout,
    branch_norm_census,
    build_deformed_cluster,
    compile_layout,
    embed_target,
    fidelity_bound,
    smooth,
    verify_carving,
)
from .pipeline import (
    GROUND_FID_TOL,
    STAGE_CHOICES,
    ZERO_ENERGY_TOL,
    PipelineConfig,
    fixture_generate,
    load_model,
    run_pipeline,
)
from .spin_model import (
    GeneralModel,
    encode_general,
    observable_expectation,
    parse_observable,
    partition_function,
)
from .state import dump_state, fidelity, load_state

ORACLE_TOL = 1e-10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(data: dict, output: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _layout_with_model(path: str) -> ClusterLayout:
    layout = ClusterLayout.load(path)
    if layout.model is None:
        raise InputError("layout file carries no model; regenerate it with `compile`")
    return layout


# --- model ------------------------------------------------------------------


def cmd_model_validate(args) -> int:
    model, _ = load_model(args.file)
    _emit(
        {
            "valid": True,
            "n_spins": model.n_spins,
            "n_terms": len(model.terms),
            "max_arity": max((len(t.sites) for t in model.terms), default=0),
            "offset": model.offset,
        },
        None,
    )
    return 0


def cmd_model_encode(args) -> int:
    gm = GeneralModel.from_dict(_read_json(args.file))
    model = encode_general(gm, max_arity=args.max_arity)
    Path(args.output).write_text(model.to_json())
    return 0


# --- classical / quantum ----------------------------------------------------


def cmd_classical_thermal(args) -> int:
    model, _ = load_model(args.file)
    thermal = partition_function(model, args.beta)
    out = {"beta": args.beta, "Z": thermal.Z, "log_Z": thermal.log_Z}
    if args.probabilities:
        out["probabilities"] = thermal.probabilities.tolist()
    if args.observable:
        out["expectation"] = observable_expectation(model, args.beta, parse_observable(args.observable, model))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "probability"])
            for idx, p in enumerate(thermal.probabilities):
                w.writerow([format(idx, f"0{model.n_spins}b") if model.n_spins else "", repr(float(p))])
    _emit(out, args.output)
    return 0


def cmd_quantum_clique(args) -> int:
    model, _ = load_model(args.file)
    sys_, state = build_clique_state(model)
    deformed, Z_q = apply_lambda(sys_, state, args.beta)
    probs = thermal_readout(sys_, deformed)
    out = {"beta": args.beta, "n_qubits": sys_.n_qubits, "labels": sys_.labels(), "Z_quantum": Z_q}
    if args.observable:
        out["expectation"] = readout_observable(sys_, deformed, parse_observable(args.observable, model))
    code = 0
    if args.compare_oracle:
        oracle = partition_function(model, args.beta)
        Z_o = partition_function(model.without_offset(), args.beta).Z
        dev = float(np.abs(probs - oracle.probabilities).max())
        out |= {"Z_oracle": Z_o, "max_abs_deviation": dev, "tolerance": ORACLE_TOL}
        if args.observable:
            out["expectation_oracle"] = observable_expectation(
                model, args.beta, parse_observable(args.observable, model)
            )
        out["passed"] = bool(dev <= ORACLE_TOL and abs(Z_q - Z_o) <= ORACLE_TOL * Z_o)
        code = 0 if out["passed"] else 3
    _emit(out, args.output)
    return code


# --- carving ----------------------------------------------------------------


def _certificate_block(layout: ClusterLayout, epsilon: float) -> dict:
    sys_ = CliqueSystem(layout.model)
    cert = verify_carving(layout, sys_, strict=False)
    out = {"certificate": cert.to_dict()}
    n_a = len(layout.a_qubits)
    if cert.pauli_pattern and n_a <= 20:
        census = branch_norm_census(layout)
        out["census_uniform"] = bool(np.abs(census - census.mean()).max() <= 1e-10)
    target = embed_target(layout, build_clique_state(layout.model)[1])
    measured = fidelity(build_deformed_cluster(layout, smooth(layout, epsilon), None), target)
    out |= {"epsilon": epsilon, "fidelity_bound": fidelity_bound(epsilon, n_a), "smoothed_fidelity": measured}
    return out


def cmd_compile(args) -> int:
    model, _ = load_model(args.file)
    layout = compile_layout(CliqueSystem(model), max_area=args.max_area, budget=args.budget)
    Path(args.output).write_text(layout.to_json())
    summary = {
        "rows": layout.lattice.rows,
        "cols": layout.lattice.cols,
        "n_a": len(layout.a_qubits),
        "status": layout.status,
        "one_a_neighbor": layout.satisfies_one_a_neighbor(),
        "render": layout.render().splitlines(),
    }
    if args.verify:
        if layout.status != "verified":
            raise ResourceError("layout exceeds the dense cap and cannot be verified by projection")
        summary |= _certificate_block(layout, args.epsilon)
    _emit(summary, None)
    return 0


def cmd_carve_verify(args) -> int:
    layout = _layout_with_model(args.layout)
    out = _certificate_block(layout, args.epsilon)
    _emit(out, args.output)
    return 0 if out["certificate"]["valid"] else 3


# --- hamiltonian ------------------------------------------------------------


def _hamiltonian_report(args) -> tuple[dict, list]:
    layout = _layout_with_model(args.layout)
    sys_ = CliqueSystem(layout.model)
    lam = lambda_deformation(sys_, args.beta)
    omega = smooth(layout, args.epsilon)
    H = assemble(layout, omega, lam)
    ref = build_deformed_cluster(layout, omega, lam)
    g = ground_analysis(H, ref, method=args.method, seed=args.seed)
    out = g.to_dict() | {
        "beta": args.beta,
        "epsilon": args.epsilon,
        "term_count": len(H.terms),
        "max_term_norm": H.max_term_norm(),
        "min_term_eigenvalue": min(t.min_eigenvalue() for t in H.terms),
        "max_support": max(len(t.support) for t in H.terms),
        "one_a_neighbor": layout.one_a_neighbor_report(),
    }
    out["one_a_neighbor"] = {str(k): v for k, v in out["one_a_neighbor"].items()}
    if args.dump_terms:
        Path(args.dump_terms).write_text(json.dumps(H.term_dump()) + "\n")
    return out, H.terms


def cmd_hamiltonian_build(args) -> int:
    out, _ = _hamiltonian_report(args)
    _emit(out, args.output)
    return 0


def cmd_hamiltonian_verify(args) -> int:
    out, _ = _hamiltonian_report(args)
    checks = {
        "ground_energy": abs(out["E0"]) <= ZERO_ENERGY_TOL * out["norm"],
        "gap": out["gap"] >= GAP_FLOOR,
        "fidelity": out["fidelity"] >= 1 - GROUND_FID_TOL,
        "term_psd": out["min_term_eigenvalue"] >= PSD_FLOOR,
        "locality": out["max_support"] <= 5,
    }
    out["checks"] = checks
    out["passed"] = all(checks.values())
    _emit(out, args.output)
    return 0 if out["passed"] else 3


# --- pipeline / fixtures / state ----------------------------------------------


def cmd_pipeline_run(args) -> int:
    config = PipelineConfig(
        model_path=args.file,
        beta=args.beta,
        epsilon=args.epsilon,
        stage=args.stage,
        output=args.output,
        verbosity=args.verbose,
        dense_cap=args.dense_cap,
        eigen_dim_cap=args.eigen_budget,
        seed=args.seed,
    )
    report = run_pipeline(config)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.verbose:
        for c in report.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.6e} {c.relation} {c.tolerance:.12g}", file=sys.stderr)
        if report.error:
            print(f"error: {report.error['message']}", file=sys.stderr)
    return report.exit_code


def cmd_fixtures_gen(args) -> int:
    paths = fixture_generate(args.seed, args.count, args.max_spins, args.max_arity, args.outdir)
    _emit({"seed": args.seed, "files": [str(p) for p in paths]}, None)
    return 0


def cmd_state_dump(args) -> int:
    layout = _layout_with_model(args.layout)
    sys_ = CliqueSystem(layout.model)
    omega = smooth(layout, args.epsilon) if args.epsilon > 0 else None
    state = build_deformed_cluster(layout, omega, lambda_deformation(sys_, args.beta))
    dump_state(state, args.output)
    return 0


def cmd_state_diff(args) -> int:
    a, b = load_state(args.a), load_state(args.b)
    if a.n_qubits != b.n_qubits:
        raise InputError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    diff = float(np.abs(a.amplitudes - b.amplitudes).max())
    out = {"n_qubits": a.n_qubits, "max_abs_difference": diff, "fidelity": fidelity(a, b)}
    _emit(out, None)
    return 0 if diff <= args.tol else 3


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clustertherm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def beta_eps(sp, beta=True):
        if beta:
            sp.add_argument("--beta", type=float, required=True)
        sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)

    model = sub.add_parser("model", help="validate or encode model files")
    msub = model.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = msub.add_parser("validate")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_model_validate)
    sp = msub.add_parser("encode", help="binary-encode a general q-level model")
    sp.add_argument("file")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--max-arity", type=int, default=3)
    sp.set_defaults(func=cmd_model_encode)

    classical = sub.add_parser("classical", help="brute-force thermal oracle")
    csub = classical.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = csub.add_parser("thermal")
    sp.add_argument("file")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--observable", help="energy or parity:<i,j,...>")
    sp.add_argument("--probabilities", action="store_true", help="include the full distribution")
    sp.add_argument("--csv", help="also write the probability table as CSV")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_classical_thermal)

    quantum = sub.add_parser("quantum", help="clique-state readout")
    qsub = quantum.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = qsub.add_parser("clique")
    sp.add_argument("file")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--compare-oracle", action="store_true")
    sp.add_argument("--observable")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_quantum_clique)

    sp = sub.add_parser("compile", help="compile a model to a cluster layout")
    sp.add_argument("file")
    sp.add_argument("--verify", action="store_true", help="report the carving certificate and smoothed fidelity")
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    sp.add_argument("--max-area", type=int, default=20)
    sp.add_argument("--budget", type=int, default=200_000, help="search step budget")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_compile)

    carve = sub.add_parser("carve", help="check a layout file")
    vsub = carve.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = vsub.add_parser("verify")
    sp.add_argument("layout")
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_carve_verify)

    ham = sub.add_parser("hamiltonian", help="parent Hamiltonian of a layout")
    hsub = ham.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, func in (("build", cmd_hamiltonian_build), ("verify", cmd_hamiltonian_verify)):
        sp = hsub.add_parser(name)
        sp.add_argument("layout")
        beta_eps(sp)
        sp.add_argument("--method", choices=("auto", "dense", "shift-invert", "lanczos"), default="auto")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--dump-terms", help="write the local terms as JSON")
        sp.add_argument("-o", "--output")
        sp.set_defaults(func=func)

    pipe = sub.add_parser("pipeline", help="run the staged pipeline")
    psub = pipe.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = psub.add_parser("run")
    sp.add_argument("file")
    beta_eps(sp)
    sp.add_argument("--stage", choices=STAGE_CHOICES, default="full")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dense-cap", type=int)
    sp.add_argument("--eigen-budget", type=int, help="largest Hilbert-space dimension to diagonalize")
    sp.add_argument("-v", "--verbose", action="count", default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_pipeline_run)

    fix = sub.add_parser("fixtures", help="generate random model files")
    fsub = fix.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = fsub.add_parser("gen")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--max-spins", type=int, default=4)
    sp.add_argument("--max-arity", type=int, default=3)
    sp.add_argument("-o", "--outdir", default="fixtures")
    sp.set_defaults(func=cmd_fixtures_gen)

    st = sub.add_parser("state", help="debug state dumps")
    ssub = st.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = ssub.add_parser("dump", help="dump the deformed cluster state of a layout")
    sp.add_argument("layout")
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="0 disables smoothing")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_state_dump)
    sp = ssub.add_parser("diff")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_state_diff)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClusterThermError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
