"""Command-line interface.

Subcommands: replay, optimize, wigner, closure, trotter-check, size-sweep.
Exit codes: 0 success, 2 validation error, 3 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import time
from importlib import resources
from typing import Optional

import numpy as np

from .core import (
    Convention,
    DickeSpace,
    NormDriftError,
    NotHermitianError,
    QuantumState,
    apply,
    build_sx,
    build_sy,
    fidelity,
)
from .gates import (
    GateConventions,
    PulseSequence,
    apply_sequence,
    flatten_params,
    sequence_unitaries,
    unflatten_params,
)
from .optimizer import OptimizerConfig, grown_search, random_restart_search
from .seqfile import (
    ResultRecord,
    SequenceFileError,
    load_sequence_file,
    save_sequence_file,
)
from .targets import (
    TargetKind,
    TargetSpec,
    TruncationError,
    make_target,
)
from .algebra import (
    lie_closure,
    oscillator_counterexample,
    trotter_commutator_error,
    trotter_sum_error,
)
from .wigner import (
    PLANAR_APPROXIMATION_LABEL,
    export_grid,
    planar_wigner,
    spherical_wigner,
)

BUNDLED_SEQUENCES = {
    "cat2": "cat2.json",
    "cat4": "cat4.json",
    "gkp-square": "gkp_square.json",
    "gkp-hexagonal": "gkp_hexagonal.json",
}


def _resolve_sequence_path(name_or_path: str) -> str:
    if name_or_path in BUNDLED_SEQUENCES:
        ref = resources.files("dickesim") / "sequences" / BUNDLED_SEQUENCES[name_or_path]
        return str(ref)
    return name_or_path


def _target_spec_from_args(args, metadata_target: Optional[dict] = None) -> TargetSpec:
    if args.target is None:
        if not metadata_target:
            raise SequenceFileError(
                "no --target given and the sequence file carries no target metadata")
        kind = TargetKind(metadata_target["kind"])
        gamma = metadata_target.get("gamma", [3.0, 0.0])
        return TargetSpec(
            kind=kind,
            gamma=complex(gamma[0], gamma[1]) if isinstance(gamma, list) else complex(gamma),
            phi=float(metadata_target.get("phi", np.pi / 4)),
            squeezing_db=float(metadata_target.get("squeezing_db", 10.0)),
            gkp_codeword=metadata_target.get("gkp_codeword", "sensor"),
            allow_truncation=bool(metadata_target.get("allow_truncation", False)),
        )
    kind = TargetKind(args.target)
    custom = None
    if kind is TargetKind.CUSTOM:
        if not getattr(args, "custom_amplitudes", None):
            raise ValueError("--target custom requires --custom-amplitudes FILE")
        with open(args.custom_amplitudes, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        custom = tuple(complex(v[0], v[1]) if isinstance(v, list) else complex(v)
                       for v in raw)
    return TargetSpec(
        kind=kind,
        gamma=complex(args.gamma),
        phi=args.phi,
        squeezing_db=args.squeezing_db,
        gkp_codeword=args.gkp_codeword,
        allow_truncation=bool(getattr(args, "allow_truncation", False)),
        custom_amplitudes=custom,
    )


def _target_spec_inputs(spec: TargetSpec) -> dict:
    return {
        "kind": spec.kind.value,
        "gamma": [spec.gamma.real, spec.gamma.imag],
        "phi": spec.phi,
        "squeezing_db": spec.squeezing_db,
        "gkp_codeword": spec.gkp_codeword,
        "allow_truncation": spec.allow_truncation,
        "custom": list(map(lambda c: [c.real, c.imag], spec.custom_amplitudes))
        if spec.custom_amplitudes else None,
    }


def _conventions_dict(convention: Convention, conv: GateConventions) -> dict:
    return {
        "convention": convention.value,
        "exponent_sign": conv.exponent_sign,
        "squeeze_order": conv.squeeze_order,
        "squeeze_composition": conv.squeeze_composition,
        "rotation_composition": conv.rotation_composition,
    }


def _override_conventions(args, base_convention: Convention,
                          base: GateConventions) -> tuple:
    convention = Convention(args.convention) if args.convention else base_convention
    conv = GateConventions(
        squeeze_order=args.squeeze_order or base.squeeze_order,
        squeeze_composition=args.squeeze_composition or base.squeeze_composition,
        rotation_composition=args.rotation_composition or base.rotation_composition,
        exponent_sign=args.exponent_sign if args.exponent_sign else base.exponent_sign,
    )
    return convention, conv


def _rebuild_on(seq: PulseSequence, convention: Convention,
                n: Optional[int] = None) -> PulseSequence:
    space = DickeSpace(n if n is not None else seq.space.n_emitters, convention)
    return PulseSequence(space, seq.steps, seq.final_axis, seq.final_theta)


def _replay_fidelity(seq: PulseSequence, spec: TargetSpec,
                     conv: GateConventions) -> float:
    target = make_target(spec, seq.space)
    final = apply_sequence(seq, QuantumState.ground(seq.space), conv)
    return fidelity(final, target)


def _sweep_combos():
    """Every resolvable convention combination (squeeze order collapses for
    the combined composition)."""
    for convention, sign, rot in itertools.product(
            (Convention.SPIN_J, Convention.PAULI_SUM), (1, -1),
            ("combined", "product")):
        for comp, order in (("product", "xy"), ("product", "yx"), ("combined", "xy")):
            yield convention, GateConventions(squeeze_order=order,
                                              squeeze_composition=comp,
                                              rotation_composition=rot,
                                              exponent_sign=sign)


def _emit(out_path, record: ResultRecord, started: float) -> None:
    if out_path:
        record.save(out_path)
        print(f"record written to {out_path}")
    else:
        sys.stdout.write(record.to_json())
    print(f"wall time: {time.perf_counter() - started:.3f} s")


def cmd_replay(args) -> int:
    started = time.perf_counter()
    path = _resolve_sequence_path(args.sequence)
    seq, file_conv, metadata = load_sequence_file(path, args.n)
    spec = _target_spec_from_args(args, metadata.get("target"))
    convention, conv = _override_conventions(args, seq.space.convention, file_conv)
    seq = _rebuild_on(seq, convention)
    inputs = {
        "sequence": args.sequence,
        "n_emitters": seq.space.n_emitters,
        "target": _target_spec_inputs(spec),
        "conventions": _conventions_dict(convention, conv),
        "sweep": bool(args.sweep_conventions),
    }
    outputs = {}
    if args.sweep_conventions:
        rows = []
        for cvn, c in _sweep_combos():
            fid = _replay_fidelity(_rebuild_on(seq, cvn), spec, c)
            rows.append({**_conventions_dict(cvn, c), "fidelity": fid})
        rows.sort(key=lambda r: -r["fidelity"])
        outputs["sweep"] = rows
        outputs["fidelity"] = rows[0]["fidelity"]
        outputs["best_conventions"] = {k: rows[0][k] for k in rows[0] if k != "fidelity"}
        print(f"best fidelity {rows[0]['fidelity']:.6f} under {outputs['best_conventions']}")
    else:
        fid = _replay_fidelity(seq, spec, conv)
        outputs["fidelity"] = fid
        outputs["conventions"] = _conventions_dict(convention, conv)
        print(f"fidelity {fid:.6f} under {outputs['conventions']}")
    if "reported_fidelity" in metadata:
        outputs["reported_fidelity"] = metadata["reported_fidelity"]
    _emit(args.out, ResultRecord("replay", inputs, outputs), started)
    return 0


def cmd_optimize(args) -> int:
    started = time.perf_counter()
    space = DickeSpace(args.n, Convention(args.convention or "spin-j"))
    conv = GateConventions(
        squeeze_order=args.squeeze_order or "xy",
        squeeze_composition=args.squeeze_composition or "product",
        rotation_composition=args.rotation_composition or "combined",
        exponent_sign=args.exponent_sign or 1,
    )
    spec = _target_spec_from_args(args)
    target = make_target(spec, space)
    config = OptimizerConfig(
        max_steps=args.steps,
        restarts=args.restarts,
        freeze_rounds=args.freeze_rounds,
        free_param_budget=args.free_params,
        nm_max_iters=args.nm_iters,
        nm_tolerance=args.nm_tol,
        seed=args.seed,
        target_infidelity=1.0 - args.stop_fidelity if args.stop_fidelity else 0.0,
        conventions=conv,
    )
    start_steps = args.start_steps if args.start_steps else min(2, args.steps)
    initial = None
    if args.resume:
        prev_seq, _, prev_meta = load_sequence_file(args.resume)
        start_steps = prev_seq.n_steps
        initial = flatten_params(prev_seq)
        print(f"resuming from {args.resume} at {start_steps} steps "
              f"(recorded fidelity {prev_meta.get('best_fidelity')})")

    def checkpoint(params, fid):
        if not args.seq_out:
            return
        n_steps = (params.size - 3) // 5
        seq = unflatten_params(space, n_steps, params)
        save_sequence_file(args.seq_out, seq, conv, {
            "name": "optimized",
            "target": _target_spec_inputs(spec),
            "best_fidelity": fid,
            "seed": args.seed,
        })

    if initial is not None:
        run = random_restart_search(space, target, config, start_steps,
                                    initial_params=initial, on_improvement=checkpoint)
    else:
        run = grown_search(space, target, config, start_steps, args.steps,
                           on_improvement=checkpoint)
    inputs = {
        "n_emitters": args.n,
        "target": _target_spec_inputs(spec),
        "conventions": _conventions_dict(space.convention, conv),
        "steps": args.steps,
        "start_steps": start_steps,
        "restarts": args.restarts,
        "freeze_rounds": args.freeze_rounds,
        "free_params": args.free_params,
    }
    outputs = {
        "best_fidelity": run.best_fidelity,
        "n_steps": run.n_steps,
        "best_params": list(run.best_params),
        "history_tail": [list(h) for h in run.history[-10:]],
        "sequence_file": args.seq_out,
    }
    print(f"best fidelity {run.best_fidelity:.6f} with {run.n_steps} steps")
    if args.seq_out:
        checkpoint(run.best_params, run.best_fidelity)
        print(f"sequence written to {args.seq_out}")
    _emit(args.out, ResultRecord("optimize", inputs, outputs, seed=args.seed), started)
    return 0


def cmd_wigner(args) -> int:
    started = time.perf_counter()
    outputs = {"files": []}
    inputs = {"surface": args.surface}
    if args.sequence:
        path = _resolve_sequence_path(args.sequence)
        seq, file_conv, metadata = load_sequence_file(path, args.n)
        convention, conv = _override_conventions(args, seq.space.convention, file_conv)
        seq = _rebuild_on(seq, convention)
        inputs.update(sequence=args.sequence, n_emitters=seq.space.n_emitters,
                      conventions=_conventions_dict(convention, conv),
                      per_step=bool(args.per_step))
        states = []
        state = QuantumState.ground(seq.space)
        if args.per_step:
            for u in sequence_unitaries(seq, conv):
                state = apply(u, state)
                states.append(state)
        else:
            states.append(apply_sequence(seq, state, conv))
    else:
        spec = _target_spec_from_args(args)
        space = DickeSpace(args.n, Convention(args.convention or "spin-j"))
        inputs.update(target=_target_spec_inputs(spec), n_emitters=args.n)
        states = [make_target(spec, space)]

    out = args.out or "wigner.csv"
    multi = len(states) > 1
    if multi:
        os.makedirs(out, exist_ok=True)
    for idx, st in enumerate(states):
        if args.surface == "sphere":
            grid = spherical_wigner(st, args.n_theta, args.n_phi)
            extra = {"integral": grid.integral()}
        else:
            grid = planar_wigner(st, args.x_max, args.p_max, args.resolution)
            extra = {"integral": grid.integral(),
                     "approximation": PLANAR_APPROXIMATION_LABEL,
                     "window_clipped": grid.window_clipped}
        if multi:
            name = f"step{idx + 1:02d}.csv" if idx < len(states) - 1 else "final.csv"
            path = os.path.join(out, name)
        else:
            path = out
        export_grid(grid, path)
        outputs["files"].append({"path": path, **extra})
        print(f"wrote {path} (integral {extra['integral']:.6f})")
    if args.surface == "plane":
        outputs["approximation"] = PLANAR_APPROXIMATION_LABEL
        print(f"planar Wigner uses the {PLANAR_APPROXIMATION_LABEL} approximation")
    _emit(args.record, ResultRecord("wigner", inputs, outputs), started)
    return 0


def cmd_closure(args) -> int:
    started = time.perf_counter()
    inputs = {"set": args.set, "n_emitters": args.n, "cutoff": args.cutoff,
              "rank_tol": args.rank_tol}
    if args.set == "oscillator":
        report = oscillator_counterexample(args.cutoff, rank_tol=args.rank_tol)
    else:
        space = DickeSpace(args.n, Convention(args.convention or "spin-j"))
        sx, sy = build_sx(space), build_sy(space)
        gens = [sx, sy]
        if args.set == "squeezing-rotations":
            gens += [sx @ sx, sy @ sy]
        report = lie_closure(gens, rank_tol=args.rank_tol)
    outputs = {
        "generator_count": report.generator_count,
        "reached_dimension": report.reached_dimension,
        "traceless_dimension": report.traceless_dimension,
        "target_dimension": report.target_dimension,
        "iterations": report.iterations,
        "universal": report.universal,
        "artifact_count": report.artifact_count,
    }
    print(f"closure: traceless {report.traceless_dimension}/{report.target_dimension} "
          f"(reached {report.reached_dimension}, artifacts {report.artifact_count}) "
          f"universal={report.universal}")
    _emit(args.out, ResultRecord("closure", inputs, outputs), started)
    return 0


def cmd_trotter_check(args) -> int:
    started = time.perf_counter()
    space = DickeSpace(args.n, Convention(args.convention or "spin-j"))
    sx, sy = build_sx(space), build_sy(space)
    a, b = sx @ sx, sy
    ks = [int(k) for k in args.k_list.split(",")]
    sum_errors = [trotter_sum_error(a, b, args.t, k) for k in ks]
    comm_errors = [trotter_commutator_error(a, b, args.t, k) for k in ks]

    def slope(errors):
        return float(np.polyfit(np.log(ks), np.log(errors), 1)[0])

    outputs = {
        "k": ks,
        "sum_errors": sum_errors,
        "commutator_errors": comm_errors,
        "sum_slope": slope(sum_errors),
        "commutator_slope": slope(comm_errors),
    }
    inputs = {"n_emitters": args.n, "t": args.t, "k_list": ks,
              "generators": "a = S_x^2, b = S_y"}
    print(f"sum slope {outputs['sum_slope']:.3f}, "
          f"commutator slope {outputs['commutator_slope']:.3f} (ideal -1)")
    _emit(args.out, ResultRecord("trotter-check", inputs, outputs), started)
    return 0


def cmd_size_sweep(args) -> int:
    started = time.perf_counter()
    path = _resolve_sequence_path(args.sequence)
    seq, file_conv, metadata = load_sequence_file(path)
    spec = _target_spec_from_args(args, metadata.get("target"))
    convention, conv = _override_conventions(args, seq.space.convention, file_conv)
    ns = [int(v) for v in args.n_list.split(",")]
    rows = []
    for n in ns:
        try:
            seq_n = _rebuild_on(seq, convention, n)
            fid = _replay_fidelity(seq_n, spec, conv)
            rows.append({"n_emitters": n, "fidelity": fid})
            print(f"N={n}: fidelity {fid:.6f}")
        except (TruncationError, ValueError) as exc:
            rows.append({"n_emitters": n, "error": str(exc)})
            print(f"N={n}: error {exc}")
    fids = [r["fidelity"] for r in rows if "fidelity" in r]
    outputs = {"table": rows}
    if fids:
        outputs["fidelity_std"] = float(np.std(fids))
        print(f"fidelity std over N: {outputs['fidelity_std']:.6f}")
    inputs = {"sequence": args.sequence, "n_list": ns,
              "target": _target_spec_inputs(spec),
              "conventions": _conventions_dict(convention, conv)}
    _emit(args.out, ResultRecord("size-sweep", inputs, outputs), started)
    return 0


def _add_convention_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--convention", choices=["spin-j", "pauli-sum"], default=None)
    p.add_argument("--squeeze-order", choices=["xy", "yx"], default=None)
    p.add_argument("--squeeze-composition", choices=["product", "combined"], default=None)
    p.add_argument("--rotation-composition", choices=["combined", "product"], default=None)
    p.add_argument("--exponent-sign", type=int, choices=[1, -1], default=None)


def _add_target_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", default=None,
                   choices=[k.value for k in TargetKind])
    p.add_argument("--gamma", default="3", help="complex, e.g. '3' or '2+1j'")
    p.add_argument("--phi", type=float, default=float(np.pi / 4))
    p.add_argument("--squeezing-db", type=float, default=10.0)
    p.add_argument("--gkp-codeword", choices=["sensor", "zero", "one"], default="sensor")
    p.add_argument("--allow-truncation", action="store_true",
                   help="accept targets whose tail beyond |N> exceeds the error limit")
    p.add_argument("--custom-amplitudes", default=None,
                   help="JSON file with a list of amplitudes ([re, im] pairs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickesim",
        description="Collective-spin state preparation: replay, optimize and analyze "
                    "rotation/squeezing pulse sequences on the Dicke ladder.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("replay", help="apply a pulse sequence and score it against a target")
    p.add_argument("--sequence", required=True,
                   help=f"path or bundled name: {', '.join(BUNDLED_SEQUENCES)}")
    p.add_argument("--n", type=int, default=None, help="override emitter count")
    p.add_argument("--sweep-conventions", action="store_true",
                   help="evaluate every convention combination and report the best")
    _add_target_flags(p)
    _add_convention_flags(p)
    p.add_argument("--out", default=None, help="write the result record here")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("optimize", help="search for a pulse sequence preparing a target")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=3, help="maximum sequence length M")
    p.add_argument("--start-steps", type=int, default=None,
                   help="initial M for the growth schedule (default 2)")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--freeze-rounds", type=int, default=2)
    p.add_argument("--free-params", type=int, default=20)
    p.add_argument("--nm-iters", type=int, default=2000)
    p.add_argument("--nm-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-fidelity", type=float, default=None,
                   help="stop once this fidelity is reached")
    p.add_argument("--resume", default=None, help="checkpoint sequence file to resume from")
    p.add_argument("--seq-out", default=None, help="checkpoint/output sequence file")
    _add_target_flags(p)
    _add_convention_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("wigner", help="export Wigner-function grids as CSV")
    p.add_argument("--sequence", default=None)
    p.add_argument("--per-step", action="store_true",
                   help="one sphere grid per step (sequence sources only)")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--surface", choices=["sphere", "plane"], default="sphere")
    p.add_argument("--n-theta", type=int, default=0)
    p.add_argument("--n-phi", type=int, default=0)
    p.add_argument("--x-max", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=0.0)
    p.add_argument("--resolution", type=int, default=201)
    _add_target_flags(p)
    _add_convention_flags(p)
    p.add_argument("--out", default=None,
                   help="CSV path, or directory with --per-step")
    p.add_argument("--record", default=None, help="write the result record here")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("closure", help="Lie-algebra closure / controllability check")
    p.add_argument("--set", choices=["squeezing-rotations", "rotations-only", "oscillator"],
                   required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--cutoff", type=int, default=12)
    p.add_argument("--rank-tol", type=float, default=1e-8)
    p.add_argument("--convention", choices=["spin-j", "pauli-sum"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("trotter-check", help="product-formula error scaling")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--k-list", default="8,16,32,64")
    p.add_argument("--convention", choices=["spin-j", "pauli-sum"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_trotter_check)

    p = sub.add_parser("size-sweep", help="replay one sequence across system sizes")
    p.add_argument("--sequence", required=True)
    p.add_argument("--n-list", required=True, help="comma-separated emitter counts")
    _add_target_flags(p)
    _add_convention_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_size_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SequenceFileError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NormDriftError, NotHermitianError, TruncationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
