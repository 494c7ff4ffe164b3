"""Command-line interface.

Subcommands: simulate (snapshot generation), identify (coefficient
recovery), compare (relative errors between coefficient files), bench
(timing/storage/accuracy sweeps), diagnose (truncation profile of a
vector), exact (closed-form coefficients), and schema-check (validate
output files). All results are machine-readable CSV/JSON; nothing is
plotted.

Exit codes: 0 success, 2 configuration error, 3 simulation failure,
4 solve failure. ``--config FILE`` runs a full configuration document
instead of flags; the environment variable ``TTIDENT_DENSE_CAP``
overrides the dense-materialization entry cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .coefficients import CoefficientModel, relative_error
from .diagnostics import (
    BENCH_COLUMNS,
    run_benchmark,
    truncation_profile,
    write_benchmark_csv,
    write_benchmark_manifest,
)
from .exceptions import (
    ConfigError,
    DegenerateInput,
    ModeMismatch,
    ShapeMismatch,
    SizeCapExceeded,
    StepFailure,
    TTIdentError,
    UnsupportedLayout,
)
from .features import Dictionary, build_basis_matrix
from .pseudoinverse import TTPseudoinverse
from .regression import mandy_identify, model_residual, sindy_lstsq, sindy_threshold
from .systems import (
    SYSTEMS,
    ChuaParams,
    FpuParams,
    KuramotoParams,
    SnapshotSet,
    canonical_dictionary,
    exact_coefficients,
    generate_snapshots,
)
from .tensor_train import TensorTrain

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_SOLVE = 4

_PARAM_KEYS = ("alpha", "beta", "delta1", "delta2", "coupling", "forcing")


def _dense_cap() -> int | None:
    value = os.environ.get("TTIDENT_DENSE_CAP")
    if value is None:
        return None
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"TTIDENT_DENSE_CAP must be an integer: {value!r}") from exc


def _require(options: dict, key: str):
    if options.get(key) is None:
        raise ConfigError(f"missing required option {key!r}")
    return options[key]


def _check_keys(options: dict, allowed: set[str], command: str) -> None:
    unknown = {k for k, v in options.items() if v is not None} - allowed
    if unknown:
        raise ConfigError(f"unknown keys for {command}: {sorted(unknown)}")


def _build_params(system: str, options: dict):
    if system == "chua":
        fields = {}
        for key in ("alpha", "beta", "delta1", "delta2"):
            if options.get(key) is not None:
                fields[key] = float(options[key])
        return ChuaParams(**fields)
    d = _require(options, "d")
    if system == "fpu":
        fields = {"d": int(d)}
        if options.get("beta") is not None:
            fields["beta"] = float(options["beta"])
        return FpuParams(**fields)
    fields = {"d": int(d)}
    if options.get("coupling") is not None:
        fields["coupling"] = float(options["coupling"])
    if options.get("forcing") is not None:
        fields["forcing"] = float(options["forcing"])
    return KuramotoParams(**fields)


def _load_dictionary(spec) -> Dictionary:
    if isinstance(spec, Dictionary):
        return spec
    if isinstance(spec, dict):
        return Dictionary.from_config(spec)
    text = str(spec)
    if text.strip().startswith("{"):
        return Dictionary.from_config(json.loads(text))
    with open(text, "r", encoding="utf-8") as handle:
        return Dictionary.from_config(json.load(handle))


# -- subcommands -----------------------------------------------------------


def cmd_simulate(options: dict) -> int:
    _check_keys(options, {
        "system", "d", "m", "dt", "t_end", "endpoint", "seed", "output",
        *_PARAM_KEYS,
    }, "simulate")
    system = _require(options, "system")
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r} (choose from {SYSTEMS})")
    params = _build_params(system, options)
    output = Path(_require(options, "output"))
    snaps = generate_snapshots(
        system,
        params,
        m=None if options.get("m") is None else int(options["m"]),
        dt=None if options.get("dt") is None else float(options["dt"]),
        t_end=None if options.get("t_end") is None else float(options["t_end"]),
        include_endpoint=bool(options.get("endpoint", False)),
        seed=None if options.get("seed") is None else int(options["seed"]),
    )
    snaps.save(output)
    print(f"wrote {snaps.m} snapshots of {system} (d={snaps.d}) to {output}")
    return EXIT_OK


def _exact_reference(snaps: SnapshotSet, dictionary: Dictionary):
    try:
        return exact_coefficients(snaps.system, snaps.params_object(), dictionary)
    except (UnsupportedLayout, ConfigError):
        return None


def cmd_identify(options: dict) -> int:
    _check_keys(options, {
        "input", "method", "dictionary", "epsilon", "cutoff", "max_iter",
        "output", "report",
    }, "identify")
    input_path = Path(_require(options, "input"))
    output = Path(_require(options, "output"))
    method = options.get("method") or "mandy"
    if method not in ("sindy", "mandy", "both"):
        raise ConfigError(f"method must be sindy, mandy, or both, not {method!r}")
    try:
        snaps = SnapshotSet.load(input_path)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load snapshots from {input_path}: {exc}") from exc
    if options.get("dictionary") is not None:
        dictionary = _load_dictionary(options["dictionary"])
    else:
        dictionary = canonical_dictionary(snaps.system)
    epsilon = float(options.get("epsilon") or 0.0)
    cutoff = float(options.get("cutoff") or 0.0)
    max_iter = int(options.get("max_iter") or 20)
    exact = _exact_reference(snaps, dictionary)
    cap = _dense_cap()

    methods = ["sindy", "mandy"] if method == "both" else [method]
    models: dict[str, CoefficientModel] = {}
    cells = []
    for name in methods:
        if name == "sindy":
            psi = build_basis_matrix(dictionary, snaps.states, max_entries=cap)
            started = time.perf_counter()
            if cutoff > 0.0:
                result = sindy_threshold(psi, snaps.derivatives, cutoff, max_iter)
            else:
                result = sindy_lstsq(psi, snaps.derivatives)
            wall = time.perf_counter() - started
            model = CoefficientModel(
                result.coefficients, dictionary,
                meta={"method": "sindy", "cutoff": cutoff, "m": snaps.m,
                      "wall_time": wall},
            )
            residual = result.residual
            storage = psi.size
        else:
            model = mandy_identify(
                snaps.states, snaps.derivatives, dictionary, threshold=epsilon
            )
            model.meta["method"] = "mandy"
            wall = model.meta["wall_time"]
            residual = model_residual(model, snaps.states, snaps.derivatives)
            storage = model.meta["storage_entries"]
        models[name] = model
        cells.append({
            "method": name,
            "residual": residual,
            "rel_error_vs_exact": None if exact is None
            else relative_error(model, exact),
            "wall_time": wall,
            "storage_entries": storage,
        })

    if len(methods) == 1:
        paths = {methods[0]: output}
    else:
        paths = {
            name: output.with_name(f"{output.stem}_{name}{output.suffix}")
            for name in methods
        }
    for name, path in paths.items():
        models[name].save(path)
    report = {
        "input": str(input_path),
        "system": snaps.system,
        "d": snaps.d,
        "m": snaps.m,
        "dictionary": dictionary.to_config(),
        "results": cells,
        "coefficients": {name: str(path) for name, path in paths.items()},
    }
    if len(methods) == 2:
        report["mutual_rel_error"] = relative_error(
            models["mandy"], models["sindy"]
        )
    report_path = options.get("report")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
    print(json.dumps(report["results"], indent=2))
    return EXIT_OK


def cmd_compare(options: dict) -> int:
    _check_keys(options, {"inputs", "output"}, "compare")
    inputs = _require(options, "inputs")
    if len(inputs) < 2:
        raise ConfigError("compare needs at least two coefficient files")
    models = []
    for path in inputs:
        try:
            models.append(CoefficientModel.load(path))
        except (FileNotFoundError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load coefficients from {path}: {exc}") from exc
    pairs = []
    for i in range(len(models)):
        for j in range(i + 1, len(models)):
            pairs.append({
                "first": str(inputs[i]),
                "second": str(inputs[j]),
                "rel_error": relative_error(models[i], models[j]),
            })
    document = {"pairs": pairs}
    if options.get("output"):
        with open(options["output"], "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2)
    print(json.dumps(document, indent=2))
    return EXIT_OK


def cmd_bench(options: dict) -> int:
    _check_keys(options, {"grid", "seed", "output", "manifest"}, "bench")
    grid_spec = _require(options, "grid")
    if isinstance(grid_spec, list):
        cells = grid_spec
    else:
        text = str(grid_spec)
        if text.strip().startswith("["):
            cells = json.loads(text)
        else:
            with open(text, "r", encoding="utf-8") as handle:
                cells = json.load(handle)
    if not isinstance(cells, list):
        raise ConfigError("the benchmark grid must be a list of cells")
    seed = int(options.get("seed") or 0)
    cap = _dense_cap()
    records = run_benchmark(cells, seed=seed, dense_cap=cap)
    output = _require(options, "output")
    write_benchmark_csv(records, output)
    manifest = options.get("manifest")
    if manifest:
        write_benchmark_manifest(records, manifest, seed=seed, dense_cap=cap)
    done = sum(record.status == "ok" for record in records)
    print(f"{done}/{len(records)} cells completed; results in {output}")
    return EXIT_OK


def _load_vector(path: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such input file: {path}")
    if path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
        if not isinstance(doc, dict) or "values" not in doc:
            raise ConfigError("vector JSON must be an object with a 'values' list")
        return np.asarray(doc["values"], dtype=np.float64).reshape(-1)
    try:
        return np.loadtxt(path, delimiter=",").reshape(-1)
    except ValueError:
        return np.loadtxt(path, delimiter=",", skiprows=1).reshape(-1)


def cmd_diagnose(options: dict) -> int:
    _check_keys(options, {"input", "modes", "output"}, "diagnose")
    values = _load_vector(_require(options, "input"))
    modes = _require(options, "modes")
    if isinstance(modes, str):
        modes = [int(part) for part in modes.split(",") if part.strip()]
    modes = [int(n) for n in modes]
    try:
        profile = truncation_profile(values, modes, max_entries=_dense_cap())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    document = profile.to_json_dict()
    if options.get("output"):
        with open(options["output"], "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2)
    print(json.dumps(document, indent=2))
    return EXIT_OK


def cmd_exact(options: dict) -> int:
    _check_keys(options, {"system", "d", "output", *_PARAM_KEYS}, "exact")
    system = _require(options, "system")
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r} (choose from {SYSTEMS})")
    params = _build_params(system, options)
    model = exact_coefficients(system, params)
    output = _require(options, "output")
    model.save(output)
    print(f"wrote exact {system} coefficients to {output}")
    return EXIT_OK


def _check_one_schema(path: Path) -> str:
    if path.suffix == ".csv":
        with open(path, newline="", encoding="utf-8") as handle:
            header = next(csv.reader(handle))
        if header == list(BENCH_COLUMNS):
            return "benchmark CSV"
        if path.with_suffix(".json").exists():
            SnapshotSet.load(path)
            return "snapshot CSV"
        raise ValueError("unrecognized CSV header and no sibling metadata JSON")
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict):
        raise ValueError("top-level JSON value must be an object")
    if "cores" in doc and "mode_sizes" in doc:
        TensorTrain.from_json_dict(doc)
        return "tensor train"
    if "left_cores" in doc:
        TTPseudoinverse.from_json_dict(doc)
        return "pseudoinverse"
    if "variant" in doc and "dictionary" in doc:
        CoefficientModel.from_json_dict(doc)
        return "coefficients"
    if "time_grid" in doc and "system" in doc:
        SnapshotSet.load(path.with_suffix(".csv"))
        return "snapshot metadata"
    if "cells" in doc and "columns" in doc:
        if doc["columns"] != list(BENCH_COLUMNS):
            raise ValueError("manifest column list does not match the schema")
        return "benchmark manifest"
    if "cuts" in doc and "mode_sizes" in doc:
        for cut in doc["cuts"]:
            if not {"cut", "eigenvalues", "eps_of_r", "renyi_half"} <= set(cut):
                raise ValueError("incomplete truncation-profile cut")
        return "truncation profile"
    if "pairs" in doc:
        return "comparison report"
    if "results" in doc and "dictionary" in doc:
        return "identification report"
    if "command" in doc:
        _validate_config(doc)
        return "run configuration"
    raise ValueError("unrecognized document type")


def cmd_schema_check(options: dict) -> int:
    _check_keys(options, {"inputs"}, "schema-check")
    inputs = _require(options, "inputs")
    failures = 0
    for name in inputs:
        path = Path(name)
        try:
            kind = _check_one_schema(path)
        except Exception as exc:  # noqa: BLE001 - report and flag any defect
            print(f"{path}: INVALID ({exc})", file=sys.stderr)
            failures += 1
        else:
            print(f"{path}: ok ({kind})")
    if failures:
        raise ConfigError(f"{failures} file(s) failed schema validation")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "identify": cmd_identify,
    "compare": cmd_compare,
    "bench": cmd_bench,
    "diagnose": cmd_diagnose,
    "exact": cmd_exact,
    "schema-check": cmd_schema_check,
}


def _validate_config(doc: dict) -> tuple[str, dict]:
    if "command" not in doc:
        raise ConfigError("configuration needs a 'command' key")
    command = doc["command"]
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    options = {k: v for k, v in doc.items() if k != "command"}
    return command, options


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttident",
        description="Recover governing equations from snapshot data with "
        "tensor-train least squares.",
    )
    parser.add_argument(
        "--config", help="run a full JSON configuration instead of a subcommand"
    )
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="generate snapshot data")
    sim.add_argument("--system", required=True, choices=SYSTEMS)
    sim.add_argument("--d", type=int, help="state dimension (fpu, kuramoto)")
    sim.add_argument("--m", type=int, help="number of snapshots")
    sim.add_argument("--dt", type=float, help="sampling step for trajectories")
    sim.add_argument("--t-end", type=float, dest="t_end", help="simulation horizon")
    sim.add_argument("--endpoint", action="store_true", default=None,
                     help="include the final time point in the grid")
    sim.add_argument("--seed", type=int)
    for key in _PARAM_KEYS:
        sim.add_argument(f"--{key}", type=float)
    sim.add_argument("--output", "-o", required=True, help="snapshot CSV path")

    ident = sub.add_parser("identify", help="fit coefficients to snapshots")
    ident.add_argument("--input", "-i", required=True, help="snapshot CSV path")
    ident.add_argument("--method", choices=("sindy", "mandy", "both"))
    ident.add_argument("--dictionary",
                       help="dictionary JSON file or inline JSON object")
    ident.add_argument("--epsilon", type=float,
                       help="tensor-train truncation threshold")
    ident.add_argument("--cutoff", type=float,
                       help="hard-thresholding cutoff (dense method)")
    ident.add_argument("--max-iter", type=int, dest="max_iter")
    ident.add_argument("--output", "-o", required=True, help="coefficient JSON path")
    ident.add_argument("--report", help="report JSON path")

    comp = sub.add_parser("compare", help="relative errors between coefficients")
    comp.add_argument("inputs", nargs="+", help="coefficient JSON files")
    comp.add_argument("--output", "-o", help="pairwise report JSON path")

    bench = sub.add_parser("bench", help="run a benchmark grid")
    bench.add_argument("--grid", required=True,
                       help="grid JSON file or inline JSON list")
    bench.add_argument("--seed", type=int)
    bench.add_argument("--output", "-o", required=True, help="results CSV path")
    bench.add_argument("--manifest", help="run manifest JSON path")

    diag = sub.add_parser("diagnose", help="truncation profile of a vector")
    diag.add_argument("--input", "-i", required=True,
                      help="vector file (.json with 'values' or single-column CSV)")
    diag.add_argument("--modes", required=True,
                      help="comma-separated mode sizes, e.g. 2,2,2,2")
    diag.add_argument("--output", "-o", help="profile JSON path")

    exact = sub.add_parser("exact", help="closed-form coefficients of a system")
    exact.add_argument("--system", required=True, choices=SYSTEMS)
    exact.add_argument("--d", type=int)
    for key in _PARAM_KEYS:
        exact.add_argument(f"--{key}", type=float)
    exact.add_argument("--output", "-o", required=True)

    check = sub.add_parser("schema-check", help="validate output files")
    check.add_argument("inputs", nargs="+", help="files to validate")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config is not None:
            if args.command is not None:
                raise ConfigError("--config replaces the subcommand; give only one")
            with open(args.config, "r", encoding="utf-8") as handle:
                doc = json.load(handle)
            command, options = _validate_config(doc)
        else:
            if args.command is None:
                parser.print_help(sys.stderr)
                return EXIT_CONFIG
            command = args.command
            options = {
                k: v for k, v in vars(args).items() if k not in ("command", "config")
            }
        return _COMMANDS[command](options)
    except (ConfigError, UnsupportedLayout, SizeCapExceeded, ModeMismatch,
            json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StepFailure as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except (DegenerateInput, ShapeMismatch, np.linalg.LinAlgError) as exc:
        print(f"solve error: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except TTIdentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
