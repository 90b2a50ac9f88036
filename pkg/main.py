"""Dimension imputation toolkit: validate, impute, inject, evaluate, gen."""

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from config.config_generator import DEFAULT_CONFIG_PATH, build_run_config, load_config
from core.errors import ImputationError, SchemaConfigError, TableFormatError
from core.inter_imputer import discover_links, discover_weak_links, export_links
from core.intra_imputer import DonorPolicy
from core.logger import FillLogger, fill_to_entry, summarize
from core.matcher import MatchConfig, load_aliases
from core.pipeline import Strategy, run_strategy
from core.schema_model import dump_schema, load_schema, table_paths_from, validate_schema
from evaluation.harness import (
    EvaluationHarness,
    format_results,
    write_breakdown,
    write_results,
)
from evaluation.injector import InjectionPlan, check_eligible, inject_plan
from evaluation.synthetic import SyntheticSpec, generate_synthetic, split_dimension

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


# ============================================================================
# Helpers
# ============================================================================

def _int_list(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _percent_list(text):
    values = [float(x) for x in text.split(",") if x.strip()]
    return [v / 100.0 for v in values]


def _pair(text):
    parts = tuple(x.strip() for x in text.split(","))
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    return parts


def _target(text):
    dim, sep, attr = text.partition(".")
    if not sep or not dim or not attr:
        raise argparse.ArgumentTypeError(f"expected DIMENSION.ATTRIBUTE, got {text!r}")
    return dim, attr


def _match_config(run):
    aliases = load_aliases(run.aliases) if run.aliases else frozenset()
    return MatchConfig(
        threshold=run.threshold,
        strip_tokens=frozenset(run.strip_tokens),
        case_fold=run.case_fold,
        aliases=aliases,
    )


def _policy(run):
    return DonorPolicy(run.policy, run.case_insensitive)


def _check_not_inputs(schema_path, out_dir):
    schema_dir = Path(schema_path).resolve().parent
    if Path(out_dir).resolve() == schema_dir:
        raise SchemaConfigError(
            f"output directory {out_dir} is the schema directory; inputs are never overwritten"
        )


def _output_table_paths(schema_path, out_dir):
    """
    Relative table paths for a copy of the warehouse under out_dir.

    Absolute table paths keep only their file name; ".." parts are refused,
    as is any output that would land on a loaded input file.
    """
    schema_path = Path(schema_path)
    out_dir = Path(out_dir).resolve()
    inputs = {schema_path.resolve()}
    paths = {}
    for name, raw in table_paths_from(schema_path).items():
        rel = Path(raw)
        inputs.add((schema_path.parent / rel).resolve())
        if rel.is_absolute():
            rel = Path(rel.name)
        elif ".." in rel.parts:
            raise SchemaConfigError(
                f"{schema_path}: table path {raw!r} of {name} leaves the schema directory"
            )
        paths[name] = rel.as_posix()

    targets = [out_dir / rel for rel in paths.values()] + [out_dir / schema_path.name]
    for target in targets:
        if target.resolve() in inputs:
            raise SchemaConfigError(
                f"output {target} is an input file; inputs are never overwritten"
            )
    if len(set(paths.values())) != len(paths):
        raise SchemaConfigError(f"{schema_path}: two dimensions share an output table path")
    return paths


class OutputSet:
    """Files written by a command; removed again if the command fails."""

    def __init__(self):
        self.paths = []

    def add(self, path):
        self.paths.append(Path(path))
        return path

    def discard(self):
        for p in self.paths:
            if p.exists():
                p.unlink()
        logger.warning("removed %d partial output file(s)", len(self.paths))


# ============================================================================
# Commands
# ============================================================================

def cmd_validate(args, config):
    run = build_run_config(args, config)
    model = load_schema(args.schema, run.null_tokens)
    report = validate_schema(model)
    for v in report:
        print(v.describe())
    if report.ok:
        print(f"✅ {args.schema}: schema is valid")
        return EXIT_OK
    print(f"❌ {args.schema}: {len(report)} violation(s)")
    return EXIT_VIOLATION


def cmd_impute(args, config):
    run = build_run_config(args, config)
    out = Path(run.output_directory)
    _check_not_inputs(args.schema, out)
    table_paths = _output_table_paths(args.schema, out)

    model = load_schema(args.schema, run.null_tokens)
    cfg = _match_config(run)
    policy = _policy(run)

    fills = run_strategy(model, run.strategy, cfg, policy, run.passes, run.jobs)

    outputs = OutputSet()
    try:
        out.mkdir(parents=True, exist_ok=True)
        for d in model.dimensions:
            outputs.add(out / table_paths[d.name])
        outputs.add(dump_schema(model, out / Path(args.schema).name, table_paths))

        log_path = outputs.add(out / f"fill_log.{run.fill_log_format}")
        fill_logger = FillLogger(log_path, run.fill_log_format)
        fill_logger.log(fills)
        if run.events:
            outputs.add(fill_logger.events_file)
            fill_logger.log_event("imputation", {
                "strategy": run.strategy, "policy": run.policy,
                "passes": run.passes, "fills": len(fills),
            })

        if args.export_links:
            links = discover_links(model, cfg)
            outputs.add(export_links(links, discover_weak_links(model, links, cfg),
                                     out / "links.json"))

        summary = summarize(fill_to_entry(f) for f in fills)
        summary["strategy"] = run.strategy
        summary["policy"] = run.policy
        summary["remaining_nulls"] = {
            f"{d.name}.{a}": len(d.table) - d.table.non_null_count(a)
            for d in model.dimensions for a in d.attributes
        }
        summary_path = outputs.add(out / "summary.json")
        with open(summary_path, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
    except Exception:
        outputs.discard()
        raise

    print(f"✅ filled {summary['total_fills']} cell(s) "
          f"({', '.join(f'{k}: {v}' for k, v in summary['by_source'].items()) or 'none'})")
    print(f"Outputs written to {out}")
    return EXIT_OK


def cmd_inject(args, config):
    run = build_run_config(args, config)
    out = Path(run.output_directory)
    _check_not_inputs(args.schema, out)
    table_paths = _output_table_paths(args.schema, out)

    model = load_schema(args.schema, run.null_tokens)
    plan = InjectionPlan(args.attr, args.rate, run.seed, bool(args.count_preexisting))
    truth = inject_plan(model, plan)

    outputs = OutputSet()
    try:
        for d in model.dimensions:
            outputs.add(out / table_paths[d.name])
        outputs.add(dump_schema(model, out / Path(args.schema).name, table_paths))
        outputs.add(out / "ground_truth.csv")
        truth.write(out / "ground_truth.csv")
    except Exception:
        outputs.discard()
        raise

    print(f"✅ injected {len(truth)} null(s) (requested {truth.requested}) into {out}")
    return EXIT_OK


def cmd_evaluate(args, config):
    run = build_run_config(args, config)
    ev = config["evaluation"]
    rates = args.rates if args.rates is not None else [r / 100.0 for r in ev["rates"]]
    trials = args.trials if args.trials is not None else int(ev["trials"])
    jobs = args.eval_jobs if args.eval_jobs is not None else int(ev["jobs"])
    timing = ev["timing"] if args.timing is None else args.timing
    count_preexisting = (ev["count_preexisting"] if args.count_preexisting is None
                         else args.count_preexisting)

    model = load_schema(args.schema, run.null_tokens)
    for dim, attr in args.attr or ():
        check_eligible(model.dimension(dim), attr)

    harness = EvaluationHarness(
        model,
        targets=args.attr,
        strategy=run.strategy,
        policy=_policy(run),
        cfg=_match_config(run),
        passes=run.passes,
        seed=run.seed,
        count_preexisting=bool(count_preexisting),
        timing=bool(timing),
        jobs=jobs,
    )
    results = harness.run(rates, trials)

    out = Path(run.output_directory)
    outputs = OutputSet()
    try:
        outputs.add(write_results(results, out / "results.csv"))
        outputs.add(write_breakdown(results, out / "results_by_attribute.csv", model))
    except Exception:
        outputs.discard()
        raise

    print(format_results(results))
    print(f"\n✅ results written to {out / 'results.csv'}")
    return EXIT_OK


def cmd_gen(args, config):
    spec = SyntheticSpec(
        levels=args.levels,
        fanout=args.fanout,
        rows=args.rows,
        weak=args.weak or (0,) * args.levels,
        strict=args.non_strict == 0,
        non_strict_fraction=args.non_strict,
        seed=args.seed,
        dimension=args.dimension,
    )
    model = generate_synthetic(spec)
    if args.split:
        model = split_dimension(model, spec.dimension, seed=args.seed,
                                names=args.split_names, prefixes=args.prefixes)

    path = dump_schema(model, Path(args.out) / "schema.json")
    print(f"✅ generated {len(model.dimensions)} dimension(s) -> {path}")
    return EXIT_OK


# ============================================================================
# Argument parsing
# ============================================================================

def _add_common(p):
    p.add_argument("schema", help="warehouse schema JSON file")
    p.add_argument("--null-token", action="append", default=None,
                   help="field value read as null (repeatable; default: empty field)")


def _add_imputation(p):
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=None)
    p.add_argument("--policy", choices=["first", "majority"], default=None)
    p.add_argument("--threshold", type=float, default=None, help="attribute match threshold")
    p.add_argument("--aliases", default=None, help="alias map JSON file")
    p.add_argument("--case-insensitive", action="store_const", const=True, default=None)
    p.add_argument("--passes", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML run configuration")
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a schema against the warehouse model")
    _add_common(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("impute", help="repair missing dimension values")
    _add_common(p)
    _add_imputation(p)
    p.add_argument("--log-format", choices=["csv", "json"], default=None)
    p.add_argument("--jobs", type=int, default=None, help="dimensions imputed concurrently")
    p.add_argument("--export-links", action="store_true")
    p.set_defaults(handler=cmd_impute)

    p = sub.add_parser("inject", help="remove a seeded fraction of attribute values")
    _add_common(p)
    p.add_argument("--attr", type=_target, action="append", required=True,
                   help="DIMENSION.ATTRIBUTE (repeatable)")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count-preexisting", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_inject)

    p = sub.add_parser("evaluate", help="run the missing-rate evaluation protocol")
    _add_common(p)
    _add_imputation(p)
    p.add_argument("--attr", type=_target, action="append", default=None,
                   help="DIMENSION.ATTRIBUTE (repeatable; default: all eligible)")
    p.add_argument("--rates", type=_percent_list, default=None, help="percentages, e.g. 1,5,10")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trial-jobs", dest="eval_jobs", type=int, default=None,
                   help="trials run concurrently")
    p.add_argument("--no-timing", dest="timing", action="store_const", const=False, default=None)
    p.add_argument("--count-preexisting", action="store_const", const=True, default=None)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("gen", help="generate a synthetic hierarchical dimension")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--fanout", type=_int_list, default=(10, 5, 4))
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--weak", type=_int_list, default=None, help="weak attributes per level")
    p.add_argument("--non-strict", type=float, default=0.0,
                   help="fraction of lower values given two parents")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dimension", default="Geo")
    p.add_argument("--split", action="store_true", help="split into two half-dimensions")
    p.add_argument("--split-names", type=_pair, default=None,
                   help="names of the two halves, e.g. Customer,Supplier")
    p.add_argument("--prefixes", type=_pair, default=None,
                   help="attribute prefixes of the two halves, e.g. c_,s_")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except (OSError, ValueError, yaml.YAMLError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=args.log_level or config["logging"]["level"],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args, config)
    except (SchemaConfigError, TableFormatError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except ImputationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except (OSError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
