"""
Command-line interface

    python -m src synth   --n 200 --bias gender=0.4 --seed 7 --out data/bundle
    python -m src detect  --bundle data/bundle --attribute all
    python -m src extract --bundle data/bundle --out data/features.csv
    python -m src run     --config experiment.json   (or flags)
    python -m src report  --out results

Exit codes: 0 success, 2 spec error, 3 IO or data error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from src.cohort import EncodingPlan, SynthConfig, ingest_cohort, synthesize_cohort, write_bundle
from src.config.settings import settings
from src.experiments import CNN_MODELS, ExperimentSpec, ResultTable, run_experiment
from src.fairness.metrics import dataset_bias, verdict
from src.features.matrix import build_feature_matrix
from src.mitigation import reweigh
from src.utils.errors import CohortError, PainFairError, SpecError
from src.utils.logger import get_pipeline_logger, get_error_logger

logger = get_pipeline_logger()
error_logger = get_error_logger()

EXIT_OK, EXIT_SPEC, EXIT_IO = 0, 2, 3
ATTRIBUTE_CHOICES = settings.protected_attributes + ("all",)


def parse_bias(text: Optional[str]) -> Dict[str, float]:
    """``"gender=0.4,race=0.2"`` -> {"gender": 0.4, "race": 0.2}; ``"none"`` -> {}"""
    if text is None or text.strip().lower() == "none":
        return {}
    bias = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"bias entry '{item}' is not of the form attribute=strength")
        try:
            bias[name.strip()] = float(value)
        except ValueError:
            raise SpecError(f"bias strength '{value}' is not a number") from None
    return bias


def _attributes(choice: Optional[str]) -> tuple:
    if choice is None or choice == "all":
        return settings.protected_attributes
    return (choice,)


def bias_report(cohort, attributes) -> Dict[str, Dict]:
    """Label-level SPD/DI per attribute, before and after reweighing."""
    labels = cohort.labels()
    out = {}
    for attribute in attributes:
        group = cohort.group(attribute)
        entry = {}
        try:
            spd_value, di_value = dataset_bias(labels, group)
            entry.update(spd=spd_value, di=di_value,
                         verdicts={"spd": verdict("spd", spd_value), "di": verdict("di", di_value)})
            _, weights = reweigh(labels, group)
            rw_spd, rw_di = dataset_bias(labels, group, weights)
            entry["reweighed"] = {"spd": rw_spd, "di": rw_di}
        except PainFairError as e:
            entry["error"] = str(e)
        out[attribute] = entry
    return out


def cmd_synth(args) -> int:
    config = SynthConfig(n_participants=args.n, bias=parse_bias(args.bias), seed=args.seed)
    cohort = synthesize_cohort(config, EncodingPlan())
    path = write_bundle(cohort, args.out)
    logger.info(f"Wrote bundle for {len(cohort.profiles)} participants to {path}")

    print(f"Dataset bias ({len(cohort)} labelled instances):")
    for attribute, entry in bias_report(cohort, settings.protected_attributes).items():
        if "error" in entry:
            print(f"  {attribute:<10} undefined ({entry['error']})")
        else:
            print(f"  {attribute:<10} SPD {entry['spd']:+.3f}  DI {entry['di']:.3f}  "
                  f"({entry['verdicts']['di']})")
    return EXIT_OK


def cmd_detect(args) -> int:
    cohort = ingest_cohort(args.bundle, EncodingPlan())
    report = bias_report(cohort, _attributes(args.attribute))
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        logger.info(f"Bias report written to {args.out}")
    print(text)
    return EXIT_OK


def cmd_extract(args) -> int:
    plan = EncodingPlan(
        mode="features",
        variants=tuple(args.variants.split(",")) if args.variants else (),
        expand_multivalued=args.expand,
        include_demographics=args.demographics,
    )
    cohort = ingest_cohort(args.bundle, EncodingPlan())
    matrix = build_feature_matrix(cohort, plan, workers=args.workers)
    path = matrix.to_csv(args.out)
    print(f"Wrote {matrix.shape[0]} x {matrix.shape[1]} feature matrix to {path}")
    return EXIT_OK


def build_spec(args) -> ExperimentSpec:
    """Spec from ``--config`` (if any) with command-line flags layered on top"""
    payload = {}
    if args.config:
        payload = ExperimentSpec.load(args.config).model_dump(mode="json")

    if args.seed is not None:
        payload["seed"] = args.seed
    if args.bundle:
        payload["bundle"], payload["synth"] = args.bundle, None
    elif not args.config:
        payload["synth"] = {"n_participants": args.n, "bias": parse_bias(args.bias),
                            "seed": args.seed if args.seed is not None else 0}
    if args.attribute:
        payload["attributes"] = list(_attributes(args.attribute))
        payload["mafl_attributes"] = "all" if args.attribute == "all" else "each"
    if args.models:
        payload["models"] = args.models.split(",")
    elif args.loss:
        payload["models"] = [m for m, kind in CNN_MODELS.items() if kind == args.loss]
    if args.mitigations:
        payload["mitigations"] = args.mitigations.split(",")

    train = dict(payload.get("train", {}))
    for flag, key in (("fairness_lambda", "fairness_lambda"), ("reg_coef", "reg_coef"),
                      ("epochs", "epochs")):
        if getattr(args, flag) is not None:
            train[key] = getattr(args, flag)
    payload["train"] = train

    for flag in ("repetitions", "workers"):
        if getattr(args, flag) is not None:
            payload[flag] = getattr(args, flag)
    if args.out:
        payload["out_dir"] = args.out

    return ExperimentSpec.model_validate(payload)


def cmd_run(args) -> int:
    spec = build_spec(args)
    results = run_experiment(spec)
    print(results.summary())
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.out or settings.results_dir)
    if path.is_dir():
        path = path / "results.json"
    table = ResultTable.from_json(path.read_text())
    table.verify()
    print(table.summary())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="painfair", description="Fair pain-status experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Generate a synthetic cohort bundle")
    synth.add_argument("--n", type=int, default=200, help="Number of participants")
    synth.add_argument("--bias", default="none", help="attribute=strength[,...] or 'none'")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="Bundle directory")
    synth.set_defaults(handler=cmd_synth)

    detect = commands.add_parser("detect", help="Dataset-level bias report")
    detect.add_argument("--bundle", required=True)
    detect.add_argument("--attribute", choices=ATTRIBUTE_CHOICES, default="all")
    detect.add_argument("--out", help="Optional JSON output file")
    detect.set_defaults(handler=cmd_detect)

    extract = commands.add_parser("extract", help="Feature matrix CSV")
    extract.add_argument("--bundle", required=True)
    extract.add_argument("--out", required=True, help="CSV output file")
    extract.add_argument("--variants", help="Comma-separated deviance variants")
    extract.add_argument("--expand", action="store_true", help="Expand multi-valued features")
    extract.add_argument("--demographics", action="store_true", help="Prepend demographic slots")
    extract.add_argument("--workers", type=int, default=1)
    extract.set_defaults(handler=cmd_extract)

    run = commands.add_parser("run", help="Run an experiment grid")
    run.add_argument("--config", help="JSON ExperimentSpec")
    run.add_argument("--bundle")
    run.add_argument("--n", type=int, default=200, help="Synthetic participants (no bundle)")
    run.add_argument("--bias", default="none")
    run.add_argument("--seed", type=int)
    run.add_argument("--attribute", choices=ATTRIBUTE_CHOICES)
    run.add_argument("--loss", choices=("bce", "mafl"))
    run.add_argument("--models", help="Comma-separated model names")
    run.add_argument("--mitigations", help="Comma-separated mitigations")
    run.add_argument("--lambda", dest="fairness_lambda", type=float)
    run.add_argument("--reg-coef", dest="reg_coef", type=float)
    run.add_argument("--epochs", type=int)
    run.add_argument("--repetitions", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help="Results directory")
    run.set_defaults(handler=cmd_run)

    report = commands.add_parser("report", help="Ranked summary of saved results")
    report.add_argument("--out", help="Results directory or results.json")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (SpecError, ValidationError) as e:
        error_logger.error(f"{args.command}: invalid specification: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SPEC
    except (OSError, CohortError, PainFairError) as e:
        error_logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
