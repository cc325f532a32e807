"""Deterministic CSV/JSON emission of trial records and lemma reports.

CSV is RFC-4180 (header row, quoting as needed, one row per trial).  For
reproducibility every row carries the full canonical config as a JSON string
plus the code version, so a file is self-describing; identical configs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

from . import __version__
from .concentration import TailCheckReport
from .config import ExperimentConfig
from .experiments import TrialRecord

__all__ = [
    "TRIAL_COLUMNS",
    "LEMMA_COLUMNS",
    "emit_report",
    "emit_lemma_report",
    "load_json_records",
]

TRIAL_COLUMNS = [f.name for f in dataclasses.fields(TrialRecord)] + [
    "config_json",
    "code_version",
]

# Column set fixed by the verify-lemmas interface.
LEMMA_COLUMNS = ["event_name", "trials", "hits", "empirical_rate", "analytic_bound", "pass"]


def _config_json(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))


def _record_dict(record: TrialRecord, config: ExperimentConfig) -> dict:
    row = dataclasses.asdict(record)
    row["config_json"] = _config_json(config)
    row["code_version"] = __version__
    return row


def emit_report(records, fmt: str, path, config: ExperimentConfig) -> Path:
    """Write trial records as 'csv' or 'json'; returns the path written."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=TRIAL_COLUMNS)
                writer.writeheader()
                for record in records:
                    writer.writerow(_record_dict(record, config))
        elif fmt == "json":
            payload = [_record_dict(r, config) for r in records]
            for row in payload:
                row["config"] = json.loads(row.pop("config_json"))
            path.write_text(
                json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        else:
            raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path


def load_json_records(path) -> list[dict]:
    """Parse a JSON report back into record dicts (round-trip helper)."""
    return json.loads(Path(path).read_text(encoding="utf-8"))


def emit_lemma_report(reports: "list[TailCheckReport]", path) -> Path:
    """Write TailCheckReports as CSV with the documented six columns."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(LEMMA_COLUMNS)
            for rep in reports:
                writer.writerow(
                    [
                        rep.event_name,
                        rep.trials,
                        rep.hits,
                        repr(rep.empirical_rate),
                        repr(rep.analytic_bound),
                        rep.passed,
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path
