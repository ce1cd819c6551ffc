"""Command-line harness with deterministic, file-based workflows.

Exit codes: 0 success, 2 validation/parse error, 3 solver or size error.
Every output is a pure function of the flags (plus the seed); nothing
depends on the clock or the environment.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, hardware, instances, qubo, solvers, uncertainty
from .errors import BinaryCSError, SizeError, ValidationError
from .instances import CSInstance, UncertainCSInstance

UNIQUENESS_CAP = 20
EXHAUSTIVE_CAP = 25


def _write_json(doc, path):
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _int_list(text: str):
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _chain_strength(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from exc


def _schedule_for(model, args) -> solvers.AnnealSchedule:
    base = solvers.default_schedule(model)
    return solvers.AnnealSchedule(
        sweeps=args.sweeps if args.sweeps is not None else base.sweeps,
        beta_initial=args.beta0 if args.beta0 is not None else base.beta_initial,
        beta_final=args.beta1 if args.beta1 is not None else base.beta_final,
        reads=args.reads if args.reads is not None else base.reads,
    )


def _load_cs(path) -> CSInstance:
    inst = instances.load_instance(path)
    if not isinstance(inst, CSInstance):
        raise ValidationError("this command requires a standard instance (kind 'cs')")
    return inst


def _load_uncertain(path) -> UncertainCSInstance:
    inst = instances.load_instance(path)
    if not isinstance(inst, UncertainCSInstance):
        raise ValidationError("this command requires an uncertain instance (kind 'cs-uncertain')")
    return inst


def cmd_gen(args) -> int:
    if args.kind == "cs":
        inst, x = instances.gen_planted(args.m, args.n, args.s, args.dist, args.seed)
        instances.save_instance(inst, args.out, truth={"x": x})
    else:
        if args.r is None or args.gamma is None:
            raise ValidationError("--kind cs-uncertain requires --r and --gamma")
        if args.dist != "gaussian":
            raise ValidationError("uncertain instances are generated with gaussian matrices")
        inst, x, d = instances.gen_uncertain_planted(
            args.m, args.n, args.s, args.r, args.gamma, args.noise, args.seed)
        instances.save_instance(inst, args.out, truth={"x": x, "d": d})
    return 0


def cmd_build(args) -> int:
    inst = _load_cs(args.infile)
    model = qubo.build_qubo(inst)
    if args.form == "ising":
        model = qubo.qubo_to_ising(model)
        if args.normalize:
            model, _ = hardware.normalize(model)
        if args.bits is not None:
            model = hardware.quantize(model, args.bits)
    elif args.normalize or args.bits is not None:
        raise ValidationError("--normalize/--bits apply to --form ising only")
    qubo.save_model(model, args.out)
    return 0


def _result_document(res: solvers.SolveResult, lam: float) -> dict:
    doc = {
        "backend": res.backend,
        "seed": int(res.seed),
        "lambda": float(lam),
        "best_x": [int(v) for v in res.best_state],
        "best_energy": float(res.best_energy),
        "reads": [{"x": [int(v) for v in state], "energy": float(e)}
                  for state, e in res.reads],
    }
    if res.minimizers is not None:
        doc["minimizers"] = [[int(v) for v in state] for state in res.minimizers]
        doc["truncated"] = bool(res.truncated)
    return doc


def cmd_solve(args) -> int:
    inst = _load_cs(args.infile)
    if args.lam is not None:
        inst = CSInstance(inst.A, inst.y, args.lam)
    model = qubo.build_qubo(inst)
    sched = _schedule_for(qubo.qubo_to_ising(model), args) if args.backend == "sa" else None
    res = solvers.solve_qubo(model, args.backend, seed=args.seed, sched=sched,
                             starts=args.starts, cap_n=EXHAUSTIVE_CAP)
    _write_json(_result_document(res, inst.lam), args.out)
    return 0


def cmd_recover(args) -> int:
    inst = _load_uncertain(args.infile)
    sched = None
    if args.backend == "sa" and any(v is not None
                                    for v in (args.sweeps, args.reads, args.beta0, args.beta1)):
        probe = qubo.qubo_to_ising(qubo.build_qubo(
            CSInstance(inst.A0, inst.y, inst.lam)))
        sched = _schedule_for(probe, args)
    trace = uncertainty.recover(inst, backend=args.backend, eps=args.eps,
                                max_iters=args.max_iters, seed=args.seed,
                                sched=sched, starts=args.starts, cap_n=EXHAUSTIVE_CAP)
    doc = {
        "backend": args.backend,
        "seed": int(args.seed),
        "eps": float(args.eps),
        "terminated_by": trace.terminated_by,
        "converged": bool(trace.converged),
        "iterations": [{
            "x": [int(v) for v in rec.x.values],
            "d": [float(v) for v in rec.d],
            "objective": float(rec.objective),
            "residual": float(rec.residual),
        } for rec in trace.iterations],
    }
    _write_json(doc, args.out)
    return 0


def cmd_diagnose(args) -> int:
    inst = _load_cs(args.infile)
    report = {"m": inst.m, "n": inst.n, "lambda": inst.lam}
    if args.coherence:
        mu = diagnostics.mutual_coherence(inst.A)
        report["coherence"] = {
            "mu": mu,
            "sparsity_bound": None if mu == 0 else 0.5 * (1.0 + 1.0 / mu),
            "note": f"classical sufficient condition: {diagnostics.COHERENCE_SPARSITY_BOUND}",
        }
    if args.rip is not None:
        report["rip"] = {
            "s": args.rip,
            "delta": diagnostics.rip_constant(inst.A, args.rip),
            "l0_l1_threshold_2s": diagnostics.RIP_2S_THRESHOLD,
        }
    if args.uniqueness:
        unique, minimizers = diagnostics.verify_uniqueness(inst, cap_n=UNIQUENESS_CAP)
        report["uniqueness"] = {
            "unique": bool(unique),
            "minimizers": [[int(v) for v in x.values] for x in minimizers],
        }
    _write_json(report, args.out)
    return 0


def cmd_embed(args) -> int:
    model = qubo.load_model(args.infile)
    if not isinstance(model, qubo.IsingModel):
        raise ValidationError("embed expects an ising model file; build with --form ising")
    rows, cols = args.cells
    g = hardware.chimera(rows, cols, args.t)
    if args.embedding is not None:
        emb = hardware.load_embedding(args.embedding)
    elif model.n <= args.t:
        emb = hardware.cell_clique_embedding(model.n, hardware.chimera(1, 1, args.t))
    else:
        raise ValidationError(
            f"no built-in embedding for n={model.n} > t={args.t}; supply --embedding FILE")
    physical = hardware.embed(model, g, emb, args.chain_strength)
    qubo.save_model(physical, args.out)
    return 0


def _trial_seed(root_seed: int, cell_index: int, trial_index: int) -> int:
    return (root_seed ^ (cell_index * (1 << 40) + trial_index)) & ((1 << 64) - 1)


def _fmt(v: float) -> str:
    return format(v, ".6g")


def cmd_bench(args) -> int:
    n = args.n
    if any(m < 1 for m in args.m_list) or any(s < 0 for s in args.s_list) or args.trials < 1:
        raise ValidationError("bench grid values must be positive (s may be 0)")
    if any(s > n for s in args.s_list):
        raise ValidationError(f"every s must satisfy s <= n={n}")
    if n > UNIQUENESS_CAP:
        raise SizeError(f"n={n} exceeds the uniqueness enumeration cap {UNIQUENESS_CAP}")
    if args.backend == "exhaustive" and n > EXHAUSTIVE_CAP:
        raise SizeError(f"n={n} exceeds the exhaustive cap {EXHAUSTIVE_CAP}")

    lines = ["m,n,s,trials,discarded,exact_rate,support_f1_mean,residual_mean"]
    cell_index = 0
    for m in args.m_list:
        for s in args.s_list:
            discarded = 0
            exact = 0
            f1_sum = 0.0
            resid_sum = 0.0
            for trial in range(args.trials):
                seed = _trial_seed(args.seed, cell_index, trial)
                inst, x_true = instances.gen_planted(m, n, s, "gaussian", seed)
                if args.lam is not None:
                    inst = CSInstance(inst.A, inst.y, args.lam)
                unique, _ = diagnostics.verify_uniqueness(inst, cap_n=UNIQUENESS_CAP)
                if not unique:
                    discarded += 1
                    continue
                model = qubo.build_qubo(inst)
                sched = (_schedule_for(qubo.qubo_to_ising(model), args)
                         if args.backend == "sa" else None)
                res = solvers.solve_qubo(model, args.backend, seed=seed, sched=sched,
                                         starts=args.starts, cap_n=EXHAUSTIVE_CAP)
                metrics = diagnostics.recovery_metrics(res.best_state, x_true, inst)
                exact += int(metrics.exact_match)
                f1_sum += metrics.support_f1
                resid_sum += metrics.residual
            counted = args.trials - discarded
            if counted:
                rate, f1, resid = exact / counted, f1_sum / counted, resid_sum / counted
            else:
                rate = f1 = resid = float("nan")
            lines.append(f"{m},{n},{s},{args.trials},{discarded},"
                         f"{_fmt(rate)},{_fmt(f1)},{_fmt(resid)}")
            cell_index += 1
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _add_backend_flags(p, require_seed=True):
    p.add_argument("--backend", required=True, choices=["exhaustive", "sa", "local"])
    p.add_argument("--sweeps", type=int, default=None)
    p.add_argument("--reads", type=int, default=None)
    p.add_argument("--beta0", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--seed", type=int, required=require_seed, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binarycs",
        description="Binary sparse recovery via QUBO/Ising annealing surrogates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a planted instance file")
    p.add_argument("--kind", required=True, choices=["cs", "cs-uncertain"])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--noise", action="store_true")
    p.add_argument("--dist", choices=["gaussian", "bernoulli"], default="gaussian")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build a qubo/ising model file from an instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--form", required=True, choices=["qubo", "ising"])
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="minimize an instance's QUBO with a backend")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _add_backend_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("recover", help="alternating minimization on an uncertain instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-iters", dest="max_iters", type=int, required=True)
    _add_backend_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("diagnose", help="coherence / RIP / uniqueness report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--coherence", action="store_true")
    p.add_argument("--rip", type=int, default=None, metavar="S")
    p.add_argument("--uniqueness", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("embed", help="map an ising model file onto a hardware graph")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--cells", type=int, nargs=2, required=True, metavar=("R", "C"))
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--embedding", default=None)
    p.add_argument("--chain-strength", dest="chain_strength",
                   type=_chain_strength, default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("bench", help="planted-recovery benchmark grid, CSV output")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-list", dest="m_list", type=_int_list, required=True)
    p.add_argument("--s-list", dest="s_list", type=_int_list, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _add_backend_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BinaryCSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
