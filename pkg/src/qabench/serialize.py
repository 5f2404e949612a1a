"""File formats: instance JSON, results CSV with JSON sidecar, schedule CSV,
graph/embedding JSON, and report serialization.

All writers emit deterministic bytes (sorted keys, fixed separators, repr
floats, no timestamps), so identical runs produce identical files.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bench import BenchReport
from .instances import IsingInstance, Schedule
from .solvers import ExactSolution, SampleSet
from .topology import Embedding, HardwareGraph

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """Raised for unreadable or malformed toolkit files."""


def _dump_json(payload: dict, path: str | Path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def _load_json(path: str | Path) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a JSON object at top level")
    return data


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def instance_to_dict(instance: IsingInstance) -> dict:
    metadata = dict(instance.metadata)
    code = metadata.pop("code", None)
    return {
        "version": SCHEMA_VERSION,
        "n": instance.n,
        "h": [float(v) for v in instance.h],
        "couplers": [
            [int(i), int(j), float(v)] for (i, j), v in sorted(instance.J.items())
        ],
        "planted": None
        if instance.planted is None
        else [int(v) for v in instance.planted],
        "ground_energy": None
        if instance.known_ground_energy is None
        else float(instance.known_ground_energy),
        "code": code,
        "metadata": metadata,
    }


def instance_from_dict(data: dict, source: str = "<dict>") -> IsingInstance:
    for key in ("version", "n", "h", "couplers"):
        if key not in data:
            raise SchemaError(f"{source}: missing required key {key!r}")
    if data["version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"{source}: unsupported schema version {data['version']!r} "
            f"(expected {SCHEMA_VERSION!r})"
        )
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"{source}: n must be a positive integer")
    h = data["h"]
    if not isinstance(h, list) or len(h) != n:
        raise SchemaError(f"{source}: h must be a list of {n} numbers")
    couplers = data["couplers"]
    if not isinstance(couplers, list):
        raise SchemaError(f"{source}: couplers must be a list")
    J = {}
    for entry in couplers:
        if not (isinstance(entry, list) and len(entry) == 3):
            raise SchemaError(f"{source}: coupler entries must be [i, j, J] triples")
        i, j, v = entry
        if not (isinstance(i, int) and isinstance(j, int)):
            raise SchemaError(f"{source}: coupler endpoints must be integers")
        if (i, j) in J:
            raise SchemaError(f"{source}: duplicate coupler ({i}, {j})")
        J[(i, j)] = v
    metadata = data.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise SchemaError(f"{source}: metadata must be an object")
    metadata = dict(metadata)
    if data.get("code") is not None:
        metadata["code"] = data["code"]
    try:
        return IsingInstance(
            n=n,
            h=np.asarray(h, dtype=np.float64),
            J=J,
            planted=None if data.get("planted") is None else data["planted"],
            known_ground_energy=data.get("ground_energy"),
            metadata=metadata,
        )
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{source}: {exc}") from exc


def save_instance(instance: IsingInstance, path: str | Path) -> None:
    _dump_json(instance_to_dict(instance), path)


def load_instance(path: str | Path) -> IsingInstance:
    return instance_from_dict(_load_json(path), source=str(path))


# ---------------------------------------------------------------------------
# graphs and embeddings
# ---------------------------------------------------------------------------


def graph_to_dict(graph: HardwareGraph) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "grid_size": graph.grid_size,
        "inactive_qubits": sorted(graph.inactive_qubits),
        "inactive_couplers": [list(p) for p in sorted(graph.inactive_couplers)],
    }


def graph_from_dict(data: dict, source: str = "<dict>") -> HardwareGraph:
    try:
        return HardwareGraph(
            grid_size=data["grid_size"],
            inactive_qubits=frozenset(data.get("inactive_qubits") or ()),
            inactive_couplers=frozenset(
                tuple(p) for p in data.get("inactive_couplers") or ()
            ),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"{source}: {exc}") from exc


def embedding_to_dict(embedding: Embedding) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "chains": {str(k): list(v) for k, v in sorted(embedding.chains.items())},
        "chain_strength": None
        if embedding.chain_strength is None
        else {str(k): v for k, v in sorted(embedding.chain_strength.items())},
    }


def embedding_from_dict(data: dict, source: str = "<dict>") -> Embedding:
    try:
        strength = data.get("chain_strength")
        return Embedding(
            chains={int(k): tuple(v) for k, v in data["chains"].items()},
            chain_strength=None
            if strength is None
            else {int(k): float(v) for k, v in strength.items()},
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"{source}: {exc}") from exc


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


def state_to_bits(state) -> str:
    """'0' for spin +1 and '1' for spin -1, character position = spin index."""
    return "".join("0" if s > 0 else "1" for s in state)


def bits_to_state(bits: str) -> np.ndarray:
    if not bits or any(c not in "01" for c in bits):
        raise SchemaError(f"malformed state bits {bits!r}")
    return np.array([1 if c == "0" else -1 for c in bits], dtype=np.int8)


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_results(
    samples: SampleSet,
    csv_path: str | Path,
    instance_file: str | None = None,
    include_timing: bool = False,
    extra: dict | None = None,
) -> None:
    """Write per-repetition rows plus a JSON sidecar describing the run.

    Timing columns default to 0.0 so that repeated runs produce identical
    bytes; include_timing opts into real wall times (and waives that).
    """
    path = Path(csv_path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rep", "energy", "state_bits", "wall_time_s"])
        for rep in range(samples.n_reps):
            wall = samples.wall_times[rep] if include_timing else 0.0
            writer.writerow(
                [
                    rep,
                    repr(float(samples.energies[rep])),
                    state_to_bits(samples.states[rep]),
                    repr(float(wall)),
                ]
            )
    sidecar = {
        "version": SCHEMA_VERSION,
        "solver": samples.solver,
        "parameters": samples.parameters,
        "seed": samples.seed,
        "repetitions": samples.n_reps,
        "n": int(samples.states.shape[1]),
        "instance_file": instance_file,
        "min_energy": float(samples.min_energy()),
    }
    if extra:
        sidecar.update(extra)
    _dump_json(sidecar, sidecar_path(path))


def write_exact_results(
    solution: ExactSolution,
    n: int,
    csv_path: str | Path,
    instance_file: str | None = None,
) -> None:
    """Ground states as result rows; the sidecar carries energy/degeneracy."""
    path = Path(csv_path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rep", "energy", "state_bits", "wall_time_s"])
        for rep, state in enumerate(solution.ground_states):
            writer.writerow(
                [
                    rep,
                    repr(float(solution.ground_energy)),
                    state_to_bits(state),
                    repr(0.0),
                ]
            )
    sidecar = {
        "version": SCHEMA_VERSION,
        "solver": "exact",
        "parameters": {},
        "seed": None,
        "repetitions": int(solution.ground_states.shape[0]),
        "n": n,
        "instance_file": instance_file,
        "ground_energy": float(solution.ground_energy),
        "degeneracy": int(solution.degeneracy),
        "truncated": bool(solution.truncated),
    }
    _dump_json(sidecar, sidecar_path(path))


def read_results(csv_path: str | Path) -> tuple[list[dict], dict | None]:
    """Rows as dicts (rep, energy, state, wall_time_s) plus the sidecar when
    present next to the CSV."""
    path = Path(csv_path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["rep", "energy", "state_bits", "wall_time_s"]:
            raise SchemaError(f"{path}: unexpected results header {header}")
        rows = []
        for line in reader:
            if len(line) != 4:
                raise SchemaError(f"{path}: malformed row {line}")
            try:
                rows.append(
                    {
                        "rep": int(line[0]),
                        "energy": float(line[1]),
                        "state": bits_to_state(line[2]),
                        "wall_time_s": float(line[3]),
                    }
                )
            except ValueError as exc:
                raise SchemaError(f"{path}: malformed row {line}: {exc}") from exc
    sidecar = None
    side = sidecar_path(path)
    if side.exists():
        sidecar = _load_json(side)
    return rows, sidecar


def results_to_sampleset(
    rows: list[dict], instance: IsingInstance, sidecar: dict | None = None
) -> SampleSet:
    states = np.array([row["state"] for row in rows], dtype=np.int8)
    return SampleSet.from_states(
        instance,
        states,
        (sidecar or {}).get("solver", "file"),
        (sidecar or {}).get("parameters", {}),
        seed=(sidecar or {}).get("seed"),
        wall_times=np.array([row["wall_time_s"] for row in rows]),
    )


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def save_schedule_csv(schedule: Schedule, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "A", "B"])
        for s, a, b in zip(schedule.s_values, schedule.a_values, schedule.b_values):
            writer.writerow([repr(float(s)), repr(float(a)), repr(float(b))])


def load_schedule_csv(path: str | Path) -> Schedule:
    try:
        fh = Path(path).open(newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["s", "A", "B"]:
            raise SchemaError(f"{path}: schedule header must be s,A,B, got {header}")
        s_vals, a_vals, b_vals = [], [], []
        for line in reader:
            if len(line) != 3:
                raise SchemaError(f"{path}: malformed schedule row {line}")
            try:
                s_vals.append(float(line[0]))
                a_vals.append(float(line[1]))
                b_vals.append(float(line[2]))
            except ValueError as exc:
                raise SchemaError(f"{path}: malformed schedule row {line}") from exc
    try:
        return Schedule(
            s_values=np.array(s_vals),
            a_values=np.array(a_vals),
            b_values=np.array(b_vals),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _encode_value(value):
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return "unsolved"
        if math.isnan(value):
            return None
    return value


def report_to_dict(report: BenchReport) -> dict:
    data = asdict(report)
    for key in ("estimate", "ci_lower", "ci_upper"):
        data[key] = _encode_value(data[key])
    for key in ("point_values", "point_lower", "point_upper"):
        if data[key] is not None:
            data[key] = [_encode_value(v) for v in data[key]]
    data["version"] = SCHEMA_VERSION
    return data


def save_report(report: BenchReport, path: str | Path) -> None:
    _dump_json(report_to_dict(report), path)


def save_report_csv(report: BenchReport, path: str | Path) -> None:
    """Scan points as CSV rows; scalar reports produce a single row."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if report.axis is None:
            writer.writerow(["metric", "estimate", "ci_lower", "ci_upper", "flags"])
            writer.writerow(
                [
                    report.metric,
                    _csv_value(report.estimate),
                    _csv_value(report.ci_lower),
                    _csv_value(report.ci_upper),
                    ";".join(report.flags),
                ]
            )
        else:
            name = report.axis_name or "axis"
            writer.writerow([name, "value", "ci_lower", "ci_upper"])
            for k in range(len(report.axis)):
                writer.writerow(
                    [
                        repr(float(report.axis[k])),
                        _csv_value(report.point_values[k]),
                        _csv_value(report.point_lower[k]) if report.point_lower else "",
                        _csv_value(report.point_upper[k]) if report.point_upper else "",
                    ]
                )


def _csv_value(value: float) -> str:
    if value is None:
        return ""
    if math.isinf(value) and value > 0:
        return "unsolved"
    return repr(float(value))
