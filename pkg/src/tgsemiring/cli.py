"""Command-line entry point.

Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.
Output paths default to $TGS_OUTPUT_DIR (or the working directory).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import algebra, report, tgs, trainer
from .errors import TGSError, UsageError
from .nn import load_network, save_network

log = logging.getLogger("tgsemiring")

OUTPUT_DIR_ENV = "TGS_OUTPUT_DIR"


def _out_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _default(name: str) -> Path:
    return _out_dir() / name


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit(doc: dict, path: Path | None) -> None:
    text = report.dumps(doc)
    if path is None:
        sys.stdout.write(text)
    else:
        _write(path, text)
        log.info("wrote %s", path)


def _config(args) -> trainer.TrainConfig:
    return trainer.TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        margin=getattr(args, "margin", 2.0),
        learning_rate=args.lr,
        prototype_threshold=getattr(args, "threshold", None),
        schedule=args.schedule,
    )


def cmd_train(args) -> int:
    cfg = _config(args)
    res = trainer.train_logic(cfg)
    out = args.out or _default(f"encoder_seed{cfg.seed}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_network(res.network, out)
    log.info("final logic loss %.6g; encoder written to %s", res.final_loss, out)
    doc = report.build_report(cfg, res.network, res.final_loss, skip_baseline=True, timestamps=args.timestamps)
    _emit(doc, args.report or _default(f"train_report_seed{cfg.seed}.json"))
    return 0


def _baseline_job(cfg: trainer.TrainConfig) -> dict:
    return report.baseline_section(cfg)


def cmd_baseline(args) -> int:
    cfg = _config(args)
    configs = [trainer.TrainConfig(**{**cfg.__dict__, "seed": cfg.seed + k}) for k in range(args.sweep)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            runs = list(pool.map(_baseline_job, configs))
    else:
        runs = [_baseline_job(c) for c in configs]
    doc = {"schema_version": report.REPORT_SCHEMA_VERSION, "config": cfg.to_dict(), "table1": runs[0], "sweep": runs}
    _emit(doc, args.out)
    return 0


def cmd_extract(args) -> int:
    encoder = load_network(args.encoder)
    table = algebra.truth_table(encoder)
    csv_out = args.csv or _default("truth_table.csv")
    csv_out.parent.mkdir(parents=True, exist_ok=True)
    algebra.export_table(table, csv_out)
    summary = {
        "schema_version": report.REPORT_SCHEMA_VERSION,
        "table5": [
            {"pattern": list(r.pattern), "count_class0": r.count_class0,
             "count_class1": r.count_class1, "majority": r.majority}
            for r in algebra.pattern_summary(table)
        ],
        "equals_majority_vote": table == algebra.majority_of_classes_table(),
    }
    _emit(summary, args.json or _default("pattern_summary.json"))
    return 0


def cmd_verify(args) -> int:
    if args.encoder is not None:
        encoder = load_network(args.encoder)
        features = trainer.encode(encoder)
        table = algebra.truth_table(features)
    else:
        features = None
        table = algebra.import_table(args.table)
    doc = {"schema_version": report.REPORT_SCHEMA_VERSION, **algebra.property_report(table, features)}
    _emit(doc, args.out)
    if not doc["core_properties_hold"]:
        for name in ("symmetry", "idempotence", "majority"):
            if not doc[name]["holds"]:
                print(f"{name} fails, first witness: {doc[name]['violations'][0]}", file=sys.stderr)
        return 1
    return 0


def cmd_tgs_check(args) -> int:
    s = tgs.load_structure(args.structure)
    p = tgs.axiom_profile(s)
    doc = {
        "schema_version": tgs.STRUCTURE_SCHEMA_VERSION,
        "profile": p.to_dict(),
        "type": tgs.classify_type(p).value,
        "ternary_gamma_semiring": p.is_ternary_gamma_semiring,
        "zero_absorption_witnesses": tgs.check_zero_absorption(s).witnesses[:8],
    }
    _emit(doc, args.out)
    return 0


def cmd_tgs_enumerate(args) -> int:
    tables = tgs.enumerate_majority_ternary(args.n)
    doc = {
        "schema_version": tgs.STRUCTURE_SCHEMA_VERSION,
        "n": args.n,
        "candidates": len(tables),
        "tables": [t.ravel().tolist() for t in tables] if args.tables else None,
    }
    _emit(doc, args.out)
    return 0


def cmd_tgs_uniqueness(args) -> int:
    _emit(tgs.uniqueness_report(args.n), args.out)
    return 0


def cmd_tgs_canonical(args) -> int:
    _emit(tgs.canonical_boolean_4().to_dict(), args.out)
    return 0


def cmd_report(args) -> int:
    cfg = _config(args)
    doc = report.build_report(cfg, skip_baseline=args.skip_baseline, timestamps=args.timestamps)
    _emit(doc, args.out or _default(f"run_report_seed{cfg.seed}.json"))
    return 0


def _training_flags(p: argparse.ArgumentParser, margin: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=_positive_int, default=1000)
    p.add_argument("--lr", type=_positive_float, default=1e-2, help="base learning rate")
    p.add_argument("--schedule", choices=sorted(trainer.SCHEDULES), default="cosine")
    if margin:
        p.add_argument("--margin", type=_positive_float, default=2.0)
        p.add_argument("--threshold", type=_positive_float, default=None,
                       help="prototype decision threshold (default margin/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgsemiring", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the logic-constrained encoder")
    _training_flags(p)
    p.add_argument("--out", type=Path, help="encoder JSON path")
    p.add_argument("--report", type=Path, help="run report path")
    p.add_argument("--timestamps", action="store_true", help="record wall-clock times (breaks byte-identity)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("baseline", help="train the supervised baseline")
    _training_flags(p, margin=False)
    p.add_argument("--sweep", type=_positive_int, default=1, help="number of consecutive seeds")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("extract", help="enumerate the 64-entry truth table of phi")
    p.add_argument("--encoder", type=Path, required=True)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="check symmetry, idempotence, majority and associativity")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--encoder", type=Path)
    src.add_argument("--table", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tgs", help="finite ternary Gamma-semiring tools")
    tsub = p.add_subparsers(dest="tgs_command", required=True)
    q = tsub.add_parser("check")
    q.add_argument("structure", type=Path)
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_tgs_check)
    q = tsub.add_parser("enumerate")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--tables", action="store_true", help="include the tables themselves")
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_tgs_enumerate)
    q = tsub.add_parser("uniqueness")
    q.add_argument("--n", type=int, default=4)
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_tgs_uniqueness)
    q = tsub.add_parser("canonical", help="write the canonical Boolean-type structure of order 4")
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_tgs_canonical)

    p = sub.add_parser("report", help="run everything and write one RunReport")
    _training_flags(p)
    p.add_argument("--skip-baseline", action="store_true")
    p.add_argument("--timestamps", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except TGSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
