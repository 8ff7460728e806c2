"""The bundled per-state correlator dataset: schema, loading and dumping.

Layout of the JSON document::

    {"schema_version": 1,
     "source": "...",
     "states": [
        {"state_id": "Psi1", "phi": 0.0,
         "correlators": [{"label": "A0B0", "theory": 0.0904, "value": 0.0904, "sigma": 0.0102}, ...],
         "summary": {"alpha_theory": ..., "alpha": ..., "alpha_sigma": ...,
                    "beta_theory": ..., "beta": ..., "beta_sigma": ...},
         "caption": {"alpha": ..., "alpha_sigma": ..., "beta": ..., "beta_sigma": ...},
         "distance": ..., "distance_sigma": ...,
         "known_inconsistencies": [{"field": "caption.alpha", "note": "..."}]},
        ...]}

Sigmas are absolute numbers, not parenthetical last-digit notation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import DatasetError
from .inequalities import LABELS

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CorrelatorRecord:
    label: str
    theory: float
    value: float
    sigma: float


@dataclass(frozen=True)
class ReportedValues:
    alpha: float
    alpha_sigma: float
    beta: float
    beta_sigma: float
    alpha_theory: float | None = None
    beta_theory: float | None = None


@dataclass(frozen=True)
class ExperimentRecord:
    state_id: str
    phi: float
    correlators: tuple[CorrelatorRecord, ...]
    summary: ReportedValues
    caption: ReportedValues
    distance: float
    distance_sigma: float
    known_inconsistencies: tuple[tuple[str, str], ...] = ()

    def correlator(self, label: str) -> CorrelatorRecord:
        for c in self.correlators:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def flagged_fields(self) -> set[str]:
        return {f for f, _ in self.known_inconsistencies}


def _number(obj: dict, key: str, where: str, nonneg: bool = False) -> float:
    if key not in obj:
        raise DatasetError(f"{where}: missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DatasetError(f"{where}.{key}: expected a number, got {v!r}")
    if nonneg and v < 0:
        raise DatasetError(f"{where}.{key}: must be >= 0, got {v}")
    return float(v)


def _object(obj: Any, key: str, where: str) -> dict:
    v = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(v, dict):
        raise DatasetError(f"{where}: field '{key}' must be an object")
    return v


def _parse_state(s: Any, where: str) -> ExperimentRecord:
    if not isinstance(s, dict):
        raise DatasetError(f"{where}: expected an object")
    state_id = s.get("state_id")
    if not isinstance(state_id, str) or not state_id:
        raise DatasetError(f"{where}.state_id: expected a non-empty string")
    phi = _number(s, "phi", where)

    rows = s.get("correlators")
    if not isinstance(rows, list):
        raise DatasetError(f"{where}.correlators: expected a list")
    correlators = []
    for i, row in enumerate(rows):
        w = f"{where}.correlators[{i}]"
        if not isinstance(row, dict) or not isinstance(row.get("label"), str):
            raise DatasetError(f"{w}: expected an object with a string 'label'")
        correlators.append(CorrelatorRecord(
            row["label"], _number(row, "theory", w), _number(row, "value", w),
            _number(row, "sigma", w, nonneg=True),
        ))
    labels = [c.label for c in correlators]
    missing = [lab for lab in LABELS if lab not in labels]
    if missing:
        raise DatasetError(f"{where}.correlators: missing {', '.join(missing)}")
    if len(set(labels)) != len(labels) or set(labels) - set(LABELS):
        raise DatasetError(f"{where}.correlators: unexpected or repeated labels {labels}")

    t = _object(s, "summary", where)
    summary = ReportedValues(
        _number(t, "alpha", f"{where}.summary"), _number(t, "alpha_sigma", f"{where}.summary", True),
        _number(t, "beta", f"{where}.summary"), _number(t, "beta_sigma", f"{where}.summary", True),
        _number(t, "alpha_theory", f"{where}.summary"), _number(t, "beta_theory", f"{where}.summary"),
    )
    u = _object(s, "caption", where)
    caption = ReportedValues(
        _number(u, "alpha", f"{where}.caption"), _number(u, "alpha_sigma", f"{where}.caption", True),
        _number(u, "beta", f"{where}.caption"), _number(u, "beta_sigma", f"{where}.caption", True),
    )
    notes = s.get("known_inconsistencies", [])
    if not isinstance(notes, list) or not all(
        isinstance(n, dict) and isinstance(n.get("field"), str) and isinstance(n.get("note"), str) for n in notes
    ):
        raise DatasetError(f"{where}.known_inconsistencies: expected a list of {{field, note}} objects")
    return ExperimentRecord(
        state_id=state_id,
        phi=phi,
        correlators=tuple(sorted(correlators, key=lambda c: LABELS.index(c.label))),
        summary=summary,
        caption=caption,
        distance=_number(s, "distance", where, nonneg=True),
        distance_sigma=_number(s, "distance_sigma", where, nonneg=True),
        known_inconsistencies=tuple((n["field"], n["note"]) for n in notes),
    )


def parse_dataset(text: str) -> list[ExperimentRecord]:
    if not text.strip():
        raise DatasetError("dataset is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DatasetError("top level must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DatasetError(f"schema_version must be {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")
    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise DatasetError("'states' must be a non-empty list")
    records = [_parse_state(s, f"states[{i}]") for i, s in enumerate(states)]
    ids = [r.state_id for r in records]
    if len(set(ids)) != len(ids):
        raise DatasetError("state ids are not unique")
    return records


def bundled_path():
    return resources.files("bellkcbs") / "data" / "experiment.json"


def load_dataset(path: str | Path | None = None) -> list[ExperimentRecord]:
    """Records from ``path``, or from the bundled transcription when omitted."""
    if path is None:
        text = bundled_path().read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DatasetError(f"cannot read {path}: {exc.strerror}") from None
    return parse_dataset(text)


def _reported_to_json(r: ReportedValues, with_theory: bool) -> dict:
    out = {"alpha": r.alpha, "alpha_sigma": r.alpha_sigma, "beta": r.beta, "beta_sigma": r.beta_sigma}
    if with_theory:
        out = {"alpha_theory": r.alpha_theory, **out, "beta_theory": r.beta_theory}
    return out


def dump_dataset(records: list[ExperimentRecord], source: str | None = None) -> dict:
    doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if source:
        doc["source"] = source
    doc["states"] = [
        {
            "state_id": r.state_id,
            "phi": r.phi,
            "correlators": [
                {"label": c.label, "theory": c.theory, "value": c.value, "sigma": c.sigma} for c in r.correlators
            ],
            "summary": _reported_to_json(r.summary, True),
            "caption": _reported_to_json(r.caption, False),
            "distance": r.distance,
            "distance_sigma": r.distance_sigma,
            "known_inconsistencies": [{"field": f, "note": n} for f, n in r.known_inconsistencies],
        }
        for r in records
    ]
    return doc


def save_dataset(records: list[ExperimentRecord], path: str | Path, source: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(dump_dataset(records, source), fh, indent=2)
        fh.write("\n")
