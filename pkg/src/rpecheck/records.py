"""JSON run records: one RPE run's counts plus optional ground truth."""
from __future__ import annotations

import json
import math
from typing import Optional

import jsonschema

from .estimator import GenerationData, RpeRun, estimate_run

SCHEMA_VERSION = 1

_COUNTS = {
    "type": "array",
    "items": {"type": "integer", "minimum": 0},
    "minItems": 2,
    "maxItems": 2,
}

RECORD_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "sequence", "generations"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "sequence": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "generations": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["N", "counts_c", "counts_s"],
                "properties": {
                    "N": {"type": "integer", "minimum": 1},
                    "counts_c": _COUNTS,
                    "counts_s": _COUNTS,
                },
            },
        },
        "true_angle": {"type": ["number", "null"]},
        "bootstrap": {"type": "integer", "minimum": 0},
        "metadata": {"type": "object"},
    },
}


class SchemaError(ValueError):
    """A run record does not follow the expected layout."""


def validate_record(doc) -> dict:
    """Check structure and semantic invariants; return ``doc`` unchanged."""
    try:
        jsonschema.validate(doc, RECORD_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None
    seq = doc["sequence"]
    gens = doc["generations"]
    if len(seq) != len(gens):
        raise SchemaError(f"sequence has {len(seq)} entries but {len(gens)} generations are recorded")
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise SchemaError("sequence must be strictly increasing")
    if seq[0] != 1:
        raise SchemaError("the first generation must use a single repetition")
    for k, (n, g) in enumerate(zip(seq, gens)):
        if g["N"] != n:
            raise SchemaError(f"generations/{k}: N={g['N']} does not match sequence entry {n}")
        for name in ("counts_c", "counts_s"):
            succ, trials = g[name]
            if trials < 1 or succ > trials:
                raise SchemaError(f"generations/{k}/{name}: need 0 <= successes <= trials and trials >= 1")
    angle = doc.get("true_angle")
    if angle is not None and not math.isfinite(angle):
        raise SchemaError("true_angle must be finite")
    if doc.get("bootstrap", 0) >= len(seq):
        raise SchemaError("bootstrap must leave at least one compared generation")
    return doc


def run_to_record(run: RpeRun, true_angle: Optional[float] = None, metadata: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "sequence": list(run.sequence),
        "generations": [
            {"N": g.N, "counts_c": list(g.counts_c), "counts_s": list(g.counts_s)} for g in run.generations
        ],
    }
    if run.bootstrap:
        doc["bootstrap"] = run.bootstrap
    if true_angle is not None:
        doc["true_angle"] = float(true_angle)
    if metadata:
        doc["metadata"] = metadata
    return doc


def record_to_run(doc) -> tuple:
    """Validate a record and rebuild ``(run, true_angle, metadata)``."""
    validate_record(doc)
    gens = [GenerationData(g["N"], tuple(g["counts_c"]), tuple(g["counts_s"])) for g in doc["generations"]]
    run = estimate_run(gens, bootstrap=doc.get("bootstrap", 0))
    return run, doc.get("true_angle"), doc.get("metadata", {})


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_record(path, doc) -> None:
    validate_record(doc)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))


def read_record(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return validate_record(doc)
