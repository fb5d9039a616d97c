"""Command-line entry point: ``generate``, ``cluster``, ``evaluate`` and ``inspect``.

Runs are driven by an INI file::

    [data]
    data = data.csv
    schema = schema.txt

    [prenetwork.Num]
    features = num0, num1
    metric = euclidean

    [cluster]
    dnf = "Num OR Cat"
    th_qh = 0.5

Relative paths are resolved against the config file's directory.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from .data import Schema, infer_schema, load_csv
from .datagen import GeneratorConfig, generate
from .estimator import PretopoMD, PrenetworkSpec
from .exceptions import ConfigError, LengthMismatch, PretopoError
from .hierarchy import Dendrogram, export_dendrogram
from .metrics import evaluate_clustering

log = logging.getLogger("pretopomd")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}

_GENERATOR_KEYS = {"n_samples": int, "k": int, "n_numeric": int, "n_categorical": int,
                   "n_levels": int, "std": float}


class RunConfig:
    """Parsed config file with typed, key-path-aware accessors."""

    def __init__(self, parser: configparser.ConfigParser, base: Path):
        self.parser = parser
        self.base = base

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # keep prenetwork/feature names case-sensitive
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(str(exc).splitlines()[0], key=str(path)) from None
        return cls(parser, path.resolve().parent)

    def raw(self, section, key, default=None, required=False):
        if self.parser.has_option(section, key):
            value = self.parser.get(section, key).strip()
            if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
                value = value[1:-1]
            return value
        if required:
            raise ConfigError("missing required key", key=f"{section}.{key}")
        return default

    def get(self, section, key, kind=str, default=None, required=False):
        value = self.raw(section, key, None, required)
        if value is None:
            return default
        try:
            if kind is bool:
                return {"true": True, "yes": True, "1": True,
                        "false": False, "no": False, "0": False}[value.lower()]
            return kind(value)
        except (KeyError, ValueError):
            raise ConfigError(f"invalid value {value!r}", key=f"{section}.{key}") from None

    def path(self, section, key, required=True):
        value = self.raw(section, key, required=required)
        return None if value is None else self.base / value

    def generator(self) -> GeneratorConfig:
        if not self.parser.has_section("generator"):
            raise ConfigError("missing section", key="generator")
        values = {k: self.get("generator", k, t, required=True)
                  for k, t in _GENERATOR_KEYS.items()}
        values["rng_seed"] = self.get("generator", "rng_seed", int, default=0)
        return GeneratorConfig(**values)

    def prenetworks(self) -> list[PrenetworkSpec] | None:
        specs = []
        for section in self.parser.sections():
            if not section.startswith("prenetwork."):
                continue
            name = section.split(".", 1)[1]
            features = [f.strip() for f in self.get(section, "features", required=True).split(",")]
            specs.append(PrenetworkSpec(name, tuple(f for f in features if f),
                                        self.get(section, "metric", default="euclidean"),
                                        self.get(section, "weights", default="radius"),
                                        self.get(section, "threshold", float)))
        return specs or None

    def estimator(self) -> PretopoMD:
        th = "thresholds"
        seeds = "seeds"
        th_qh = self.get("cluster", "th_qh", float, default=0.5)
        if not th_qh > 0:
            raise ConfigError("must be strictly positive", key="cluster.th_qh")
        return PretopoMD(
            prenetworks=self.prenetworks(),
            rule=self.get("cluster", "dnf"),
            th_qh=th_qh,
            tie_break=self.get("cluster", "tie_break", default="index"),
            seed_size=self.get(seeds, "seed_size", int, default=3),
            seed_strategy=self.get(seeds, "seed_strategy", default="nearest_neighbors"),
            seed_metric=self.get(seeds, "seed_metric", default="gower"),
            rng_seed=self.get(seeds, "rng_seed", int, default=0),
            weighted_walk=self.get(seeds, "weighted_walk", bool, default=False),
            threshold_power=self.get(th, "threshold_power", float, default=1.0),
            closest_coeff=self.get(th, "closest_coeff", float, default=1.0),
            square_lgth_coeff=self.get(th, "square_lgth_coeff", float, default=1.0),
            area_method=self.get(th, "area_method", default="max_distance_square"),
            manual_threshold=self.get(th, "manual_threshold", float),
        )


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")
    log.info("wrote %s", path)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_table(config: RunConfig, data=None, schema=None):
    data = Path(data) if data else config.path("data", "data")
    schema = Path(schema) if schema else config.path("data", "schema", required=False)
    if schema is not None:
        return load_csv(data, Schema.load(schema)), data, schema
    return load_csv(data, infer_schema(data)), data, None


def cmd_generate(config: RunConfig, out: Path) -> dict:
    gen = config.generator()
    ds = generate(gen)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "data.csv", ds.table.to_csv())
    _write(out / "schema.txt", ds.table.schema.dumps())
    _write(out / "truth.csv", ds.truth_csv())
    return {"rows": ds.table.n, "columns": len(ds.table.schema)}


def cmd_cluster(config: RunConfig, out: Path) -> dict:
    timings = {}
    t0 = time.perf_counter()
    table, data_path, schema_path = _load_table(config)
    timings["load"] = time.perf_counter() - t0

    est = config.estimator()
    t0 = time.perf_counter()
    est.fit(table)
    timings["fit"] = time.perf_counter() - t0

    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    _write(out / "assignments.csv", est.assignment_.to_csv())
    _write(out / "dendrogram.json", export_dendrogram(est.hierarchy_, "json"))
    _write(out / "dendrogram.dot", export_dendrogram(est.hierarchy_, "dot"))
    metadata = {
        "inputs": {"data": data_path.name, "data_sha256": _sha256(data_path),
                   "schema": schema_path.name if schema_path else None},
        "params": {k: v for k, v in est.get_params().items() if k != "prenetworks"},
        # wall times vary between runs, so they live in their own file
        "timings": "timings.json",
        **est.metadata(),
    }
    _write(out / "run_metadata.json", json.dumps(metadata, indent=1, sort_keys=True) + "\n")
    timings["write"] = time.perf_counter() - t0
    _write(out / "timings.json", json.dumps(timings, indent=1) + "\n")
    return {"clusters": est.n_clusters_, "outliers": est.assignment_.n_outliers}


def read_assignments(path) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "element_id,cluster_id":
        raise ConfigError("expected header element_id,cluster_id", key=str(path))
    pairs = [tuple(int(v) for v in line.split(",")) for line in lines[1:] if line.strip()]
    ids = [p[0] for p in pairs]
    if ids != list(range(len(ids))):
        raise LengthMismatch("element ids must run 0..n-1 in order")
    return np.array([p[1] for p in pairs], dtype=int)


def cmd_evaluate(config: RunConfig, out: Path, assignments=None, data=None, schema=None) -> dict:
    table, _, _ = _load_table(config, data, schema)
    if assignments is None:
        assignments = config.path("evaluate", "assignments", required=False) or out / "assignments.csv"
    labels = read_assignments(assignments)
    report = evaluate_clustering(table, labels).as_dict()
    text = json.dumps(report, indent=1) + "\n"
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "metrics.json", text)
    sys.stdout.write(text)
    return report


def cmd_inspect(dendrogram_path: Path, query: list[str]) -> str:
    dendro = Dendrogram.loads(Path(dendrogram_path).read_text(encoding="utf-8"))
    if not query:
        raise ConfigError("empty query; use roots, path <element> or set <id>", key="query")
    verb, args = query[0], query[1:]
    if verb == "roots" and not args:
        lines = [f"{i}\tsize={len(dendro.node(i)['elements'])}" for i in dendro.roots()]
    elif verb == "path" and len(args) == 1:
        lines = [f"{i}\tsize={len(dendro.node(i)['elements'])}"
                 for i in dendro.path(_int(args[0], "element"))]
    elif verb == "set" and len(args) == 1:
        node = dendro.node(_int(args[0], "set id"))
        lines = [f"id={node['id']}", f"parent={node['parent']}",
                 f"children={' '.join(map(str, node['children']))}",
                 f"size={len(node['elements'])}",
                 f"elements={' '.join(map(str, node['elements']))}"]
    else:
        raise ConfigError(f"bad query {' '.join(query)!r}", key="query")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    return text


def _int(text, what):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{what} must be an integer, got {text!r}", key="query") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--threads", type=int, default=0, help="BLAS threads (0 = auto)")
    common.add_argument("--log-level", choices=sorted(LOG_LEVELS), default="warn")

    parser = argparse.ArgumentParser(prog="pretopomd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a synthetic labelled dataset")
    sub.add_parser("cluster", parents=[common], help="cluster a dataset")
    ev = sub.add_parser("evaluate", parents=[common], help="internal validity indices as JSON")
    ev.add_argument("--assignments", type=Path)
    ev.add_argument("--data", type=Path)
    ev.add_argument("--schema", type=Path)
    ins = sub.add_parser("inspect", parents=[common], help="query an exported dendrogram")
    ins.add_argument("--dendrogram", type=Path, help="defaults to OUT/dendrogram.json")
    ins.add_argument("query", nargs="*", help="roots | path <element> | set <id>")
    return parser


def _threads(n: int):
    if n < 0:
        raise ConfigError("must be >= 0", key="threads")
    if n == 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=LOG_LEVELS[args.log_level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        with _threads(args.threads):
            if args.command == "inspect":
                cmd_inspect(args.dendrogram or args.out / "dendrogram.json", args.query)
                return 0
            if args.config is None and not (args.command == "evaluate" and args.data):
                raise ConfigError("--config is required", key="config")
            config = (RunConfig.load(args.config) if args.config
                      else RunConfig(configparser.ConfigParser(), Path.cwd()))
            if args.command == "generate":
                cmd_generate(config, args.out)
            elif args.command == "cluster":
                summary = cmd_cluster(config, args.out)
                log.info("%(clusters)d clusters, %(outliers)d outliers", summary)
            else:
                cmd_evaluate(config, args.out, args.assignments, args.data, args.schema)
    except (PretopoError, OSError) as exc:
        key = getattr(exc, "key", None)
        print(f"error: {exc}" + (f" [{key}]" if key and key not in str(exc) else ""),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
