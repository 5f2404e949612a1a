"""Command-line interface.

Exit codes: 0 success, 1 runtime failure (generation stalls, embedding
failures), 2 usage or unsupported-parameter errors, 3 unreadable or malformed
input files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench, qac, serialize
from .instances import (
    GenerationError,
    IsingInstance,
    default_schedule,
    gen_frustrated_loops,
    gen_random_pm1,
    gen_range_k,
    gen_signature,
    gen_weak_strong,
    renormalize,
)
from .quantum_sim import spectrum_scan
from .serialize import SchemaError
from .solvers import (
    SOLVERS,
    SampleSet,
    SizeLimitError,
    SolverConfig,
    make_stub_solver,
    solve_exact,
    solve_sqa,
    solve_svmc,
)
from .topology import EmbeddingError, build_chimera, clique_embedding, minor_embed_instance


def _parse_int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}")


def _build_graph(args) -> "HardwareGraph":
    if args.grid is None:
        raise ValueError(f"--grid is required for the {args.family} family")
    inactive = _parse_int_list(args.inactive) if args.inactive else []
    return build_chimera(args.grid, inactive_qubits=inactive)


def cmd_gen(args) -> int:
    if args.family == "random_pm1":
        inst = gen_random_pm1(_build_graph(args), seed=args.seed)
    elif args.family == "range_k":
        inst = gen_range_k(_build_graph(args), k=args.k, seed=args.seed)
    elif args.family == "frustrated_loops":
        inst = gen_frustrated_loops(
            _build_graph(args), alpha=args.alpha, seed=args.seed,
            coupler_cap=args.cap,
        )
    elif args.family == "weak_strong":
        inst = gen_weak_strong(h_weak=args.h_weak)
    else:
        inst = gen_signature(n_core=args.n_core)
    if args.renormalize:
        inst = renormalize(inst)
    serialize.save_instance(inst, args.out)
    print(f"wrote {args.out}: n={inst.n}, couplers={inst.num_couplers}")
    return 0


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        repetitions=args.reps,
        sweeps=args.sweeps,
        seed=args.seed,
        beta_initial=args.beta_initial,
        beta_final=args.beta_final,
        temperature=args.temperature,
        trotter_slices=args.slices,
        slice_mode=args.slice_mode,
        temperature_ladder=_parse_float_list(args.ladder) if args.ladder else None,
        clusters=_parse_clusters(args.clusters) if args.clusters else None,
        update_order=args.update_order,
    )


def _parse_clusters(text: str):
    try:
        data = json.loads(text)
        return tuple(tuple(int(q) for q in cluster) for cluster in data)
    except (json.JSONDecodeError, TypeError):
        raise ValueError("--clusters expects a JSON list of qubit lists")


def _run_solver(name: str, instance: IsingInstance, config: SolverConfig, schedule):
    if name == "svmc":
        return solve_svmc(instance, config, schedule)
    if name == "sqa":
        return solve_sqa(instance, config, schedule)
    return SOLVERS[name](instance, config)


def cmd_solve(args) -> int:
    instance = serialize.load_instance(args.instance)
    if args.solver == "exact":
        solution = solve_exact(
            instance,
            max_component_size=args.max_component,
            max_states=args.max_states,
        )
        serialize.write_exact_results(
            solution, instance.n, args.out, instance_file=str(args.instance)
        )
        print(
            f"ground_energy={solution.ground_energy} "
            f"degeneracy={solution.degeneracy} "
            f"states_written={solution.ground_states.shape[0]}"
        )
        return 0
    if args.solver not in SOLVERS:
        raise ValueError(f"unknown solver {args.solver!r}")
    config = _config_from_args(args)
    schedule = (
        serialize.load_schedule_csv(args.schedule) if args.schedule else None
    )
    samples = _run_solver(args.solver, instance, config, schedule)
    serialize.write_results(
        samples, args.out,
        instance_file=str(args.instance),
        include_timing=args.timing,
    )
    print(f"wrote {args.out}: reps={samples.n_reps} min_energy={samples.min_energy()}")
    return 0


def cmd_encode(args) -> int:
    logical = serialize.load_instance(args.instance)
    if args.code == "qac":
        graph = None
        if args.layout == "dense":
            code = qac.QacCode.dense(
                logical.n, alpha=args.alpha, beta=args.beta,
                penalty_mode=args.penalty_mode,
            )
        else:
            if args.grid is None:
                raise ValueError("--grid is required for cell/square layouts")
            graph = build_chimera(args.grid)
            layout = qac.CELL_LAYOUT if args.layout == "cell" else qac.SQUARE_LAYOUT
            code, _ = qac.chimera_cell_code(
                graph, alpha=args.alpha, beta=args.beta,
                penalty_mode=args.penalty_mode, layout=layout,
            )
        physical = code.encode(logical, graph)
    else:
        code = qac.NestedCode(
            n_logical=logical.n,
            nesting_level=args.copies,
            gamma=args.gamma,
            field_boost=args.boost,
        )
        physical = code.encode(logical)
        if args.embed_grid is not None:
            graph = build_chimera(args.embed_grid)
            embedding = clique_embedding(physical.n, graph)
            embedded = minor_embed_instance(
                physical, embedding, graph, chain_strength=args.chain_strength
            )
            embedded.metadata["code"] = code.describe()
            physical = embedded
    serialize.save_instance(physical, args.out)
    print(f"wrote {args.out}: n={physical.n}, couplers={physical.num_couplers}")
    return 0


def cmd_spectrum(args) -> int:
    instance = serialize.load_instance(args.instance)
    schedule = (
        serialize.load_schedule_csv(args.schedule)
        if args.schedule
        else default_schedule()
    )
    scan = spectrum_scan(
        instance,
        schedule,
        s_values=np.linspace(0.0, 1.0, args.points),
        n_levels=args.levels,
    )
    import csv as _csv

    with Path(args.out).open("w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["s"] + [f"level_{k}" for k in range(args.levels)])
        for t in range(len(scan.s_values)):
            writer.writerow(
                [repr(float(scan.s_values[t]))]
                + [repr(float(v)) for v in scan.levels[t]]
            )
    print(f"min_gap={scan.min_gap} at s={scan.min_gap_s}")
    return 0


def _decode_rows(rows, instance, args):
    """Map physical result rows to a logical sample set via the stored code."""
    code_info = instance.metadata.get("code")
    if code_info is None:
        raise ValueError("--decode given but the instance carries no code block")
    if not args.logical:
        raise ValueError("--decode requires --logical with the logical instance")
    logical = serialize.load_instance(args.logical)
    code = qac.code_from_dict(code_info)
    states = np.array(
        [
            code.decode(row["state"], logical, strategy=args.decode, seed=args.seed).state
            for row in rows
        ],
        dtype=np.int8,
    )
    return logical, SampleSet.from_states(logical, states, f"decoded-{args.decode}")


def cmd_report(args) -> int:
    rows, sidecar = serialize.read_results(args.results)
    instance = serialize.load_instance(args.instance)
    if not rows:
        raise ValueError("results file has no repetitions")
    if args.decode != "none":
        target_instance, samples = _decode_rows(rows, instance, args)
    else:
        target_instance = instance
        samples = serialize.results_to_sampleset(rows, instance, sidecar)

    t_f = args.t_f
    if t_f is None and sidecar is not None:
        t_f = float(sidecar.get("parameters", {}).get("sweeps") or 0) or None

    if args.metric in ("success", "tts"):
        ground = (
            args.target
            if args.target is not None
            else bench.resolve_ground_energy(target_instance)
        )
        hits = (samples.energies <= ground + args.tolerance).astype(np.float64)
        p_hat = float(np.mean(hits))
        if args.metric == "success":
            ci = bench.bayesian_bootstrap(
                hits, bench.weighted_success, n_boot=args.boot,
                level=args.level, seed=args.seed,
            )
            report = bench.BenchReport(
                metric="success_prob",
                estimate=p_hat,
                ci_lower=ci.lower,
                ci_upper=ci.upper,
                ci_level=args.level,
                details={"repetitions": samples.n_reps, "ground_energy": ground},
            )
        else:
            if t_f is None:
                raise ValueError("--t-f is required for the tts metric")
            stat = lambda v, w: bench.tts(bench.weighted_success(v, w), t_f, args.p_d)
            ci = bench.bayesian_bootstrap(
                hits, stat, n_boot=args.boot, level=args.level, seed=args.seed
            )
            report = bench.BenchReport(
                metric="tts",
                estimate=bench.tts(p_hat, t_f, args.p_d),
                ci_lower=ci.lower,
                ci_upper=ci.upper,
                ci_level=args.level,
                flags=["unsolved"] if p_hat == 0.0 else [],
                details={"p": p_hat, "t_f": t_f, "p_d": args.p_d},
            )
    elif args.metric == "ttt":
        if args.target is None:
            raise ValueError("--target is required for the ttt metric")
        if t_f is None:
            raise ValueError("--t-f is required for the ttt metric")
        hits = (samples.energies <= args.target + args.tolerance).astype(np.float64)
        stat = lambda v, w: bench.tts(bench.weighted_success(v, w), t_f, args.p_d)
        ci = bench.bayesian_bootstrap(
            hits, stat, n_boot=args.boot, level=args.level, seed=args.seed
        )
        estimate = bench.ttt(samples, args.target, t_f, args.p_d, args.tolerance)
        report = bench.BenchReport(
            metric="ttt",
            estimate=estimate,
            ci_lower=ci.lower,
            ci_upper=ci.upper,
            ci_level=args.level,
            flags=["unsolved"] if bench.is_unsolved(estimate) else [],
            details={"target": args.target, "t_f": t_f, "p_d": args.p_d},
        )
    else:  # reward
        decision = bench.stopping_reward(
            -samples.energies, cost_per_sample=args.cost, budget=args.budget
        )
        report = bench.BenchReport(
            metric="stopping_reward",
            estimate=decision.expected_reward,
            ci_lower=decision.expected_reward,
            ci_upper=decision.expected_reward,
            ci_level=0.0,
            flags=["no-ci"],
            details={"n_star": decision.n_star, "cost": args.cost},
        )
    serialize.save_report(report, args.out)
    if args.csv:
        serialize.save_report_csv(report, args.csv)
    print(f"{report.metric}: estimate={report.estimate} flags={report.flags}")
    return 0


def _stub_from_options(options: dict, instance: IsingInstance):
    if instance.planted is None:
        raise SchemaError("stub solver items need an instance with a planted state")
    ground = instance.planted
    excited = -ground
    from .instances import energy as _energy

    if _energy(instance, excited) <= _energy(instance, ground):
        # degenerate under global flip: find any strictly uphill single flip
        for i in range(instance.n):
            trial = ground.copy()
            trial[i] = -trial[i]
            if _energy(instance, trial) > _energy(instance, ground):
                excited = trial
                break
        else:
            raise SchemaError("no excited state found for stub solver")
    if "p_by_sweeps" in options:
        table = {int(k): float(v) for k, v in options["p_by_sweeps"].items()}
        return make_stub_solver(lambda sweeps: table[sweeps], ground, excited)
    return make_stub_solver(float(options.get("p", 0.5)), ground, excited)


def _bench_worker(task):
    name, instance, solver_name, config, schedule, stub_options = task
    if solver_name == "stub":
        solver = _stub_from_options(stub_options or {}, instance)
        return name, solver(instance, config)
    return name, _run_solver(solver_name, instance, config, schedule)


def cmd_bench(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = serialize._load_json(manifest_path)
    if manifest.get("version") != serialize.SCHEMA_VERSION:
        raise SchemaError(f"{manifest_path}: unsupported manifest version")
    items = manifest.get("items")
    if not isinstance(items, list) or not items:
        raise SchemaError(f"{manifest_path}: manifest needs a nonempty items list")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = manifest_path.parent

    tasks = []
    seen_names = set()
    for item in items:
        name = item.get("name")
        if not name or not all(c.isalnum() or c in "._-" for c in str(name)):
            raise SchemaError(f"{manifest_path}: bad item name {name!r}")
        if name in seen_names:
            raise SchemaError(f"{manifest_path}: duplicate item name {name!r}")
        seen_names.add(name)
        instance = serialize.load_instance(base / item["instance"])
        solver_name = item.get("solver", "sa")
        if solver_name not in SOLVERS and solver_name != "stub":
            raise SchemaError(f"{manifest_path}: unknown solver {solver_name!r}")
        raw_cfg = dict(item.get("config") or {})
        if "temperature_ladder" in raw_cfg and raw_cfg["temperature_ladder"]:
            raw_cfg["temperature_ladder"] = tuple(raw_cfg["temperature_ladder"])
        if "clusters" in raw_cfg and raw_cfg["clusters"]:
            raw_cfg["clusters"] = tuple(tuple(c) for c in raw_cfg["clusters"])
        try:
            config = SolverConfig(**raw_cfg)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{manifest_path}: item {name}: {exc}") from exc
        if not isinstance(item.get("metric") or {}, dict):
            raise SchemaError(
                f"{manifest_path}: item {name}: metric must be an options "
                "object (keys: tolerance, t_f, p_d)"
            )
        schedule = None
        if item.get("schedule"):
            schedule = serialize.load_schedule_csv(base / item["schedule"])
        tasks.append(
            (str(name), instance, solver_name, config, schedule, item.get("stub"))
        )

    workers = max(1, int(os.environ.get("QABENCH_WORKERS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_bench_worker, tasks))
    else:
        outcomes = [_bench_worker(t) for t in tasks]

    summary_items = []
    for (name, samples), item, task in zip(outcomes, items, tasks):
        csv_path = out_dir / f"{name}.csv"
        serialize.write_results(
            samples, csv_path, instance_file=str(item["instance"])
        )
        instance = task[1]
        entry = {
            "name": name,
            "solver": samples.solver,
            "repetitions": samples.n_reps,
            "min_energy": float(samples.min_energy()),
        }
        metric = item.get("metric") or {}
        ground = instance.known_ground_energy
        if ground is not None:
            p = bench.success_prob(samples, ground, float(metric.get("tolerance", 0.0)))
            entry["success_prob"] = p
            t_f = metric.get("t_f") or task[3].sweeps or None
            if t_f:
                value = bench.tts(p, float(t_f), float(metric.get("p_d", 0.99)))
                entry["tts"] = serialize._encode_value(value)
        summary_items.append(entry)
    serialize._dump_json(
        {"version": serialize.SCHEMA_VERSION, "items": summary_items},
        out_dir / "summary.json",
    )
    print(f"wrote {len(summary_items)} result sets to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qabench",
        description="Ising instance generation, annealing-style solvers, "
        "error-suppression encodings, and TTS benchmarking.",
        epilog="Exit codes: 0 ok, 1 runtime failure, 2 usage error, "
        "3 malformed input file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an Ising instance")
    p.add_argument(
        "family",
        choices=["random_pm1", "range_k", "frustrated_loops", "weak_strong", "signature"],
    )
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=None, help="Chimera grid size")
    p.add_argument("--inactive", default="", help="comma-separated dead qubit ids")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=7, help="range_k discretization")
    p.add_argument("--alpha", type=float, default=0.25, help="loops per active qubit")
    p.add_argument("--cap", type=float, default=3.0, help="frustrated-loop |J| cap")
    p.add_argument("--h-weak", type=float, default=0.44, dest="h_weak")
    p.add_argument("--n-core", type=int, default=4, dest="n_core")
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run a solver on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", required=True, choices=["exact", "sa", "svmc", "sqa", "pt"])
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta-initial", type=float, default=0.1, dest="beta_initial")
    p.add_argument("--beta-final", type=float, default=3.0, dest="beta_final")
    p.add_argument("--temperature", type=float, default=0.05)
    p.add_argument("--slices", type=int, default=16)
    p.add_argument("--slice-mode", choices=["fixed", "best"], default="fixed", dest="slice_mode")
    p.add_argument("--ladder", default="", help="comma-separated decreasing temperatures")
    p.add_argument("--clusters", default="", help="JSON list of cluster qubit lists")
    p.add_argument("--update-order", choices=["sequential", "random"],
                   default="sequential", dest="update_order",
                   help="spin visit order per annealing sweep")
    p.add_argument("--schedule", default="", help="schedule CSV for svmc/sqa")
    p.add_argument("--timing", action="store_true", help="write real wall times")
    p.add_argument("--max-component", type=int, default=30, dest="max_component")
    p.add_argument("--max-states", type=int, default=4096, dest="max_states")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("encode", help="encode an instance with a correction code")
    p.add_argument("code", choices=["qac", "nqac"])
    p.add_argument("--instance", required=True, help="logical instance file")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--penalty-mode", choices=["uniform", "scaled_to_mean"],
                   default="uniform", dest="penalty_mode")
    p.add_argument("--layout", choices=["dense", "cell", "square"], default="dense")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--copies", type=int, default=2, help="nesting level")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--boost", type=float, default=None)
    p.add_argument("--embed-grid", type=int, default=None, dest="embed_grid")
    p.add_argument("--chain-strength", type=float, default=None, dest="chain_strength")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("spectrum", help="eigenvalue scan across the anneal")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--schedule", default="")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("report", help="metrics from a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--metric", required=True, choices=["success", "tts", "ttt", "reward"])
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", default="", help="optional report CSV path")
    p.add_argument("--t-f", type=float, default=None, dest="t_f")
    p.add_argument("--p-d", type=float, default=0.99, dest="p_d")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--cost", type=float, default=0.0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decode", choices=["none", "majority", "energy_min"], default="none")
    p.add_argument("--logical", default="", help="logical instance for --decode")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bench", help="run a manifest of instances and solvers")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (GenerationError, EmbeddingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
