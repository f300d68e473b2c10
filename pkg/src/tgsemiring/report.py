"""RunReport assembly: one JSON document mirroring the experiment's tables."""

from __future__ import annotations

import datetime as _dt
import json
from importlib import resources

import numpy as np

from . import algebra, tgs, trainer
from .errors import ExtractionError
from .nn import Network
from .task import CLASS_NAMES, full_domain, split

REPORT_SCHEMA_VERSION = 1
SKIPPED = {"status": "skipped"}


def _failed(exc: Exception) -> dict:
    return {"status": "failed", "error": str(exc)}


def _round(x: float) -> float:
    # repr-stable floats; 12 significant digits is far below any tolerance used
    return float(f"{x:.12g}")


def _vec(v) -> list[float]:
    return [_round(float(x)) for x in np.asarray(v).ravel()]


def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def baseline_section(cfg: trainer.TrainConfig) -> dict:
    res = trainer.train_baseline(cfg)
    predict = trainer.argmax_predictor(res.network)
    train, test = split()
    return {
        "status": "ok",
        "seed": cfg.seed,
        "final_loss": _round(res.final_loss),
        "train_accuracy": trainer.evaluate(predict, train),
        "test_accuracy": trainer.evaluate(predict, test),
        "predictions": {e.display_name: CLASS_NAMES[predict(e)] for e in full_domain()},
    }


def learned_structure(table: algebra.TruthTable) -> tgs.FiniteTGS:
    """The class-level quotient as a 2-element structure: zero = A, + = OR."""
    return tgs.FiniteTGS(2, 0, tgs.join_semilattice_add(2), (algebra.class_quotient(table),))


def _algebra_sections(feats: np.ndarray) -> dict:
    """table5, properties and axiom_profile; each is marked failed if the table cannot be extracted."""
    try:
        table = algebra.truth_table(feats)
    except ExtractionError as exc:
        # an under-trained encoder may not give a class-constant table
        return dict.fromkeys(("table5", "properties", "axiom_profile"), _failed(exc))
    try:
        structure = learned_structure(table)
        profile = {**structure.profile.to_dict(), "type": tgs.classify_type(structure.profile).value}
    except ExtractionError as exc:
        profile = _failed(exc)
    return {
        "table5": {
            "status": "ok",
            "rows": [
                {
                    "pattern": list(r.pattern),
                    "count_class0": r.count_class0,
                    "count_class1": r.count_class1,
                    "majority": r.majority,
                }
                for r in algebra.pattern_summary(table)
            ],
            "equals_majority_vote": table == algebra.majority_of_classes_table(),
        },
        "properties": algebra.property_report(table, feats),
        "axiom_profile": profile,
    }


def logic_sections(encoder: Network, cfg: trainer.TrainConfig, final_loss: float) -> dict:
    domain = full_domain()
    _, test = split()
    feats = trainer.encode(encoder)
    dist = trainer.distance_matrix(encoder)
    clf = trainer.build_prototype(encoder, cfg.threshold)
    head = trainer.train_linear_head(encoder, cfg)
    no_proto = trainer.argmax_predictor(head.network, encoder)
    algebra_part = _algebra_sections(feats)
    return {
        "logic": {
            "status": "ok",
            "final_loss": _round(final_loss),
            "features": {e.display_name: _vec(f) for e, f in zip(domain, feats)},
        },
        "table3": {
            "status": "ok",
            "elements": [e.display_name for e in domain],
            "matrix": [_vec(row) for row in dist],
        },
        "table4": {
            "status": "ok",
            "threshold": cfg.threshold,
            "rows": [
                {
                    "input": e.display_name,
                    "distance_to_a": _round(clf.distance(e)),
                    "prediction": CLASS_NAMES[trainer.classify(clf, e)],
                    "ground_truth": CLASS_NAMES[e.class_label],
                }
                for e in test
            ],
            "test_accuracy": trainer.evaluate(clf, test),
        },
        **algebra_part,
        "_no_prototype_accuracy": trainer.evaluate(no_proto, test),
        "_prototype_accuracy": trainer.evaluate(clf, test),
    }


def build_report(
    cfg: trainer.TrainConfig,
    encoder: Network | None = None,
    final_loss: float | None = None,
    skip_baseline: bool = False,
    timestamps: bool = False,
) -> dict:
    started = _dt.datetime.now(_dt.timezone.utc)
    if encoder is None:
        res = trainer.train_logic(cfg)
        encoder, final_loss = res.network, res.final_loss
    sections = logic_sections(encoder, cfg, final_loss)
    table1 = SKIPPED if skip_baseline else baseline_section(cfg)
    table6 = {
        "status": "ok",
        "rows": [
            # expected accuracy of a uniform guess over two classes
            {"model": "Random guessing", "test_accuracy": 0.5},
            {
                "model": "Standard neural network",
                "test_accuracy": None if skip_baseline else table1["test_accuracy"],
            },
            {"model": "Ternary Gamma (no prototype)", "test_accuracy": sections.pop("_no_prototype_accuracy")},
            {"model": "Ternary Gamma + prototype", "test_accuracy": sections.pop("_prototype_accuracy")},
        ],
    }
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "table1": table1,
        **sections,
        "table6": table6,
        "timestamps": None,
    }
    if timestamps:
        report["timestamps"] = {
            "started": started.isoformat(),
            "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
    return report


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
