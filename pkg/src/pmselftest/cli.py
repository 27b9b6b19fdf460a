"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infeasible or failed certification.
The default seed comes from ``PMSELFTEST_SEED`` (0 when unset).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import warnings
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import DEFAULT, Tolerances
from .counterex import bargmann_profile, embedded_qubit_pair, sic_family, wigner_violation_check
from .ensemble import WeightedEnsemble, complete_ensemble, fiducial_set, randomize_basis
from .fileformat import Scenario, ScenarioError, read_scenario, result_document, write_result, write_scenario
from .povmst import (
    build_povm_witness,
    eval_povm_witness,
    example_povm,
    ideal_povm_behavior,
    is_extremal,
    povm_robustness,
    povm_self_test,
)
from .qmat import (
    DimensionMismatch,
    InvalidOperator,
    SymOp,
    as_density_matrix,
    depolarize,
    haar_unitary,
    projector,
    psd_min_eig,
    random_pure_state,
)
from .wignerd import (
    CERTIFICATES,
    ReconstructionError,
    certificate_check,
    delta_chain,
    reconstruct,
    tomography_caps,
    tomography_operator,
    tridiagonal_operator,
    tridiagonal_spectrum,
)
from .witness import Behavior, ShapeMismatch, behavior_from_realization, build_state_witness, eval_witness, ideal_behavior, robust_overlap_bounds

SEED_ENV = "PMSELFTEST_SEED"
OK, INPUT_ERROR, FAILED = 0, 1, 2


class CliError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _tolerance_override(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    names = {f.name for f in dataclasses.fields(Tolerances)}
    if not sep or name not in names:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME one of {sorted(names)}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name} needs a number, got {value!r}") from None


def _tolerance_help() -> str:
    return "override a tolerance (repeatable). Defaults: " + ", ".join(
        f"{f.name}={getattr(DEFAULT, f.name):g}" for f in dataclasses.fields(Tolerances)
    )


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


# --------------------------------------------------------------------------
# output helpers


class Report:
    """Collects the stdout summary and the result document."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.rows: list[tuple[str, str]] = []
        self.results: dict[str, Any] = {}

    def row(self, key: str, value: Any) -> None:
        if isinstance(value, float):
            value = f"{value:.6g}"
        self.rows.append((key, str(value)))

    def emit(self, command: str, inputs: Any) -> None:
        width = max((len(k) for k, _ in self.rows), default=0)
        for k, v in self.rows:
            print(f"{k.ljust(width)}  {v}")
        if self.args.output:
            write_result(self.args.output, result_document(command, inputs, self.results))


def _tolerances(args: argparse.Namespace, scen: Scenario | None = None) -> Tolerances:
    base = scen.tolerances() if scen is not None else DEFAULT
    return dataclasses.replace(base, **dict(args.tol or []))


def _load(path: str) -> Scenario:
    try:
        return read_scenario(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None


def _ensemble(scen: Scenario, tol: Tolerances) -> WeightedEnsemble:
    if scen.weights is None:
        return complete_ensemble(scen.states, tol)
    e = WeightedEnsemble(tuple(np.asarray(s, dtype=complex) for s in scen.states), tuple(scen.weights), completed=True)
    try:
        e.check()
    except ValueError as exc:
        raise ScenarioError("weights", str(exc)) from None
    return e


# --------------------------------------------------------------------------
# subcommands


def cmd_complete(args, rep: Report) -> int:
    scen = _load(args.scenario)
    tol = _tolerances(args, scen)
    e = complete_ensemble(scen.states, tol)
    rep.row("states", len(e))
    rep.row("added by completion", len(e) - e.n_targets)
    rep.row("target weight", e.weights[0])
    rep.row("|sum a_i psi_i - I/D|", float(np.max(np.abs(e.resolution() - np.eye(e.dim) / e.dim))))
    rep.results = {"states": list(e.states), "weights": list(e.weights), "n_targets": e.n_targets}
    if args.write:
        write_scenario(args.write, Scenario(e.dim, list(e.states), list(e.weights), metadata=scen.metadata))
    rep.emit("complete", scen.to_json())
    return OK


def cmd_witness(args, rep: Report) -> int:
    scen = _load(args.scenario)
    tol = _tolerances(args, scen)
    e = _ensemble(scen, tol)
    w = build_state_witness(e)
    rep.row("preparations X", w.n_preparations)
    rep.row("measurements Y", w.n_measurements)
    rep.row("maximum 1-1/D", w.w_star)
    rep.results = {"pairs": list(w.pairs), "coefficients": w.coefficients, "w_star": w.w_star, "weights": list(e.weights)}
    if args.action == "ideal":
        p = ideal_behavior(e, tol)
        value = eval_witness(w, p)
        rep.row("ideal value", value)
        rep.results.update(value=value, behavior=p.table)
    elif args.action == "eval":
        if scen.behavior is not None:
            p = Behavior(scen.behavior)
        elif scen.povms is not None:
            p = behavior_from_realization([as_density_matrix(s, tol) for s in scen.states], scen.povms)
        else:
            raise ScenarioError("behavior", "eval needs a behavior table or POVMs")
        value = eval_witness(w, p)
        eps = max(w.w_star - value, 0.0)
        rep.row("value", value)
        rep.row("deficit epsilon", eps)
        rep.results.update(value=value, epsilon=eps)
        if eps <= w.w_star:
            do, dp = robust_overlap_bounds(eps, e.weights, e.dim)
            rep.row("overlap bound delta_o", do)
            rep.row("impurity bound delta_p", dp)
            rep.results.update(delta_o=do, delta_p=dp)
        if value > w.w_star + 1e-9:
            rep.row("status", "value exceeds the quantum maximum")
            rep.emit("witness eval", scen.to_json())
            return FAILED
    rep.emit(f"witness {args.action}", scen.to_json())
    return OK


def _random_reconstruction_scenario(args, rng: np.random.Generator) -> Scenario:
    dim = args.random
    targets = [random_pure_state(rng, dim) for _ in range(args.targets)]
    _, targets, _ = randomize_basis(targets, int(rng.integers(2**31)))
    reference = targets + fiducial_set(dim).states
    u = haar_unitary(rng, dim)
    op = SymOp(u, args.anti)
    prepared = [op.apply(depolarize(projector(r), args.noise)) for r in reference]
    meta = {"seed": args.seed, "noise": args.noise, "anti_unitary": args.anti}
    return Scenario(dim, prepared, reference=reference, n_targets=len(targets), metadata=meta)


def cmd_reconstruct(args, rep: Report) -> int:
    if args.scenario:
        scen = _load(args.scenario)
    elif args.random:
        if args.random < 3:
            raise CliError("--random needs D >= 3")
        scen = _random_reconstruction_scenario(args, np.random.default_rng(args.seed))
        if args.write:
            write_scenario(args.write, scen)
    else:
        raise CliError("give a scenario file or --random D")
    if scen.reference is None:
        raise ScenarioError("reference", "reconstruct needs the reference kets")
    tol = _tolerances(args, scen)
    try:
        r = reconstruct(scen.states, scen.reference, scen.n_targets, tol=tol)
    except ReconstructionError as exc:
        rep.row("stage", exc.stage)
        rep.row("error", str(exc))
        rep.results = {"error": str(exc), "stage": exc.stage, "details": exc.details}
        rep.emit("reconstruct", scen.to_json())
        return FAILED
    c = r.chain
    rep.row("delta_o", c.delta_o)
    rep.row("delta_p", c.delta_p)
    rep.row("feasible (1,3,5)", ",".join(str(v) for v in c.feasible))
    rep.row("conjugate", r.conjugate)
    rep.row("max distance", r.max_distance)
    for fam, ok in r.family_pass().items():
        rep.row(f"within bound {fam}", ok)
    rep.results = {"report": r}
    rep.emit("reconstruct", scen.to_json())
    return OK if c.all_feasible and all(r.passed) else FAILED


def cmd_delta_chain(args, rep: Report) -> int:
    c = delta_chain(args.delta_o, args.delta_p, args.dim, args.f or [])
    for name in ("dz_prime", "dz", "dx_prime", "dx", "dy", "dxx", "dyy"):
        rep.row(name, getattr(c, name))
    for j, v in enumerate(c.dpsi):
        rep.row(f"dpsi[{j}]", v)
    rep.row("feasible (1,3,5)", ",".join(str(v) for v in c.feasible))
    rep.results = {"chain": c}
    rep.emit("delta-chain", vars_for_digest(args))
    return OK if c.all_feasible else FAILED


def _povm_from(args, tol: Tolerances) -> list[np.ndarray]:
    if getattr(args, "scenario", None):
        scen = _load(args.scenario)
        if not scen.povms:
            raise ScenarioError("povms", "missing")
        return scen.povms[0]
    return example_povm()


def cmd_povm(args, rep: Report) -> int:
    tol = _tolerances(args)
    if args.action == "example":
        p = example_povm()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            w = build_povm_witness(p, tol)
        ens = w.state_witness.ensemble
        rep.row("preparations X", w.n_preparations)
        rep.row("dichotomic measurements", w.n_pair_measurements)
        rep.row("outcomes of y=Y", w.tests[0].n_outcomes)
        rep.results = {"povm": p, "X": w.n_preparations, "Y_dichotomic": w.n_pair_measurements}
        if args.write:
            write_scenario(args.write, Scenario(3, list(ens.states), list(ens.weights), povms=[p], metadata={"seed": args.seed}))
        rep.emit("povm example", {"povm": p})
        return OK
    p = _povm_from(args, tol)
    pst = povm_self_test(p, tol)
    if args.action == "extremal":
        ok, lo = is_extremal(pst.povm, tol.extremal)
        rep.row("extremal", ok)
        rep.row("min Gram eigenvalue", lo)
        rep.results = {"extremal": ok, "min_gram_eig": lo, "ranks": [len(b) for b in pst.eigen_bases]}
        rep.emit("povm extremal", {"povm": p})
        return OK if ok else FAILED
    if args.action == "witness":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            w = build_povm_witness(p, tol)
        value = eval_povm_witness(w, ideal_povm_behavior(w, tol))
        rep.row("preparations X", w.n_preparations)
        rep.row("measurements Y", w.n_measurements)
        rep.row("ideal value", value)
        rep.row("maximum 1-1/D", w.w_star)
        rep.results = {"X": w.n_preparations, "Y": w.n_measurements, "value": value, "w_star": w.w_star}
        rep.emit("povm witness", {"povm": p})
        return FAILED if caught else OK
    if args.action == "bound":
        try:
            b = povm_robustness(pst, args.epsilon, args.delta)
        except ValueError as exc:
            rep.row("error", str(exc))
            rep.emit("povm bound", {"povm": p})
            return FAILED
        rep.row("eps_prime", b.eps_prime)
        rep.row("bound", b.bound)
        rep.row("||G^-1||", pst.gram_inv_norm)
        rep.results = {"robustness": b, "gram_inv_norm": pst.gram_inv_norm}
        rep.emit("povm bound", {"povm": p, "epsilon": args.epsilon, "delta": args.delta})
        return OK
    raise CliError(f"unknown povm action {args.action}")


def cmd_counterexample(args, rep: Report) -> int:
    if args.kind == "sic":
        a, b = sic_family(args.t), sic_family(args.tprime)
        pa, pb = bargmann_profile(a), bargmann_profile(b)
        for name, prof in (("t", pa), ("t'", pb)):
            rep.row(f"|phi|=0 count ({name})", prof.count(0.0))
            rep.row(f"|phi|=pi count ({name})", prof.count(math.pi))
        inputs = {"t": args.t, "tprime": args.tprime}
        rep.results = {"profile_t": pa.values, "profile_tprime": pb.values}
    else:
        b22 = math.sqrt(max(1 - args.b21**2, 0.0))
        b32 = math.sqrt(max(1 - args.b31**2, 0.0))
        a, b = embedded_qubit_pair(args.b21, b22, args.b31, b32, args.beta)
        inputs = {"b21": args.b21, "b31": args.b31, "beta": args.beta}
        rep.results = {"psi": a, "phi": b}
    v = wigner_violation_check(a, b)
    rep.row("verdict", v.verdict)
    rep.row("reason", v.reason)
    rep.row("span ranks", f"{v.ranks[0]} vs {v.ranks[1]}")
    rep.results["verdict"] = v
    rep.emit(f"counterexample {args.kind}", inputs)
    return OK


def cmd_certify(args, rep: Report) -> int:
    rng = np.random.default_rng(args.seed)
    ok = True
    checks: list[dict[str, Any]] = []
    thresholds = {"xx": -args.exact_tol, "xx_tight": -args.exact_tol, "yy_recovery": -args.exact_tol, "yys": -args.yys_tol, "yys_mirror": -args.yys_tol}
    for dim in args.dims:
        for name in CERTIFICATES:
            worst = min(certificate_check(name, k, dim) for k in range(dim - 2))
            passed = worst >= thresholds[name]
            ok &= passed
            checks.append({"check": name, "dim": dim, "min_eig": worst, "passed": passed})
            rep.row(f"D={dim} {name}", f"{'PASS' if passed else 'FAIL'} min eig {worst:.3e}")
    for dim in range(2, args.max_spectrum_dim + 1):
        err = float(np.max(np.abs(np.linalg.eigvalsh(tridiagonal_operator(dim)) - np.sort(tridiagonal_spectrum(dim)))))
        passed = err < 1e-12
        ok &= passed
        checks.append({"check": "tridiagonal", "dim": dim, "error": err, "passed": passed})
    rep.row(f"tridiagonal D<={args.max_spectrum_dim}", "PASS" if all(c["passed"] for c in checks if c["check"] == "tridiagonal") else "FAIL")
    for dim in args.dims:
        worst_gap, worst_tr, caps_ok = 0.0, 0.0, True
        for _ in range(args.samples):
            psi = random_pure_state(rng, dim)
            f = 1.0 / float(np.min(np.abs(psi) ** 2))
            cert = tomography_operator(psi, f)
            worst_gap = min(worst_gap, psd_min_eig(projector(psi) - cert.operator()))
            worst_tr = max(worst_tr, abs(np.real(np.vdot(psi, cert.operator() @ psi)) - 1.0))
            caps_ok &= all(n <= c + 1e-9 for n, c in zip(cert.norms(), tomography_caps(dim, f)))
        passed = worst_gap >= -1e-8 and worst_tr <= 1e-8 and caps_ok
        ok &= passed
        checks.append({"check": "tomography", "dim": dim, "min_gap": worst_gap, "trace_error": worst_tr, "caps": caps_ok, "passed": passed})
        rep.row(f"D={dim} tomography", "PASS" if passed else "FAIL")
    rep.results = {"checks": checks}
    rep.emit("certify", vars_for_digest(args))
    return OK if ok else FAILED


def vars_for_digest(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "write")}


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("-o", "--output", help="write the full result file here")
    common.add_argument("--tol", action="append", type=_tolerance_override, metavar="NAME=VALUE", help=_tolerance_help())

    parser = argparse.ArgumentParser(prog="pmselftest", description="Prepare-and-measure self-testing toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", parents=[common], help="complete states to a resolution of I/D")
    p.add_argument("scenario")
    p.add_argument("--write", help="write the completed ensemble as a scenario file")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("witness", parents=[common], help="build or evaluate the state witness")
    p.add_argument("action", choices=["build", "eval", "ideal"])
    p.add_argument("scenario")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct the (anti-)unitary from prepared states")
    p.add_argument("scenario", nargs="?")
    p.add_argument("--random", type=int, metavar="D", help="generate a random scenario in dimension D instead")
    p.add_argument("--targets", type=int, default=2, help="number of random targets (default 2)")
    p.add_argument("--noise", type=float, default=0.0, help="depolarizing strength for --random (default 0)")
    p.add_argument("--anti", action="store_true", help="use an anti-unitary image for --random")
    p.add_argument("--write", help="write the generated scenario file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("delta-chain", parents=[common], help="evaluate the robustness chain")
    p.add_argument("--do", dest="delta_o", type=float, required=True, help="overlap deviation delta_o")
    p.add_argument("--dp", dest="delta_p", type=float, required=True, help="impurity delta_p")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--f", type=_floats, default=None, help="comma-separated genericity constants f_j")
    p.set_defaults(func=cmd_delta_chain)

    p = sub.add_parser("povm", parents=[common], help="POVM extremality, witness and robustness")
    p.add_argument("action", choices=["extremal", "witness", "bound", "example"])
    p.add_argument("scenario", nargs="?", help="scenario file with povms (default: the worked example)")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--write", help="for 'example': write the POVM and its scenario")
    p.set_defaults(func=cmd_povm)

    p = sub.add_parser("counterexample", parents=[common], help="ensembles violating the Wigner property")
    csub = p.add_subparsers(dest="kind", required=True)
    c = csub.add_parser("sic", parents=[common])
    c.add_argument("--t", type=float, default=0.0)
    c.add_argument("--tprime", type=float, default=math.pi)
    c.set_defaults(func=cmd_counterexample)
    c = csub.add_parser("embedded", parents=[common])
    c.add_argument("--b21", type=float, default=0.5)
    c.add_argument("--b31", type=float, default=0.5)
    c.add_argument("--beta", type=float, default=math.pi / 3)
    c.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("certify", parents=[common], help="run every certificate check")
    p.add_argument("--dims", type=_ints, default=[3, 4, 5])
    p.add_argument("--exact-tol", type=float, default=1e-9, help="PSD slack for XX and YY-recovery (default 1e-9)")
    p.add_argument("--yys-tol", type=float, default=1e-6, help="PSD slack for the mixed-pattern certificate (default 1e-6)")
    p.add_argument("--max-spectrum-dim", type=int, default=50)
    p.add_argument("--samples", type=int, default=100, help="random states per dimension for the tomography check")
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args, Report(args))
    except ScenarioError as exc:
        print(f"error: field {exc.field}: {exc}", file=sys.stderr)
    except (CliError, DimensionMismatch, InvalidOperator, ShapeMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
