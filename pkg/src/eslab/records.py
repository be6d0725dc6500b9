"""Machine-readable output records and the JSON-lines results cache."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional

from eslab import __version__

CACHE_ENV = "ES_LAB_CACHE"


def encode_value(value: Any) -> Any:
    """Integers become decimal strings so big values never pass through float."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    raise TypeError(f"cannot encode {type(value).__name__}")


def encode_map(values: dict) -> dict:
    return {k: encode_value(v) for k, v in values.items()}


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class OutputRecord:
    command: str
    parameters: dict
    results: dict
    version: str = __version__
    timestamp: str = field(default_factory=_utc_now)

    @classmethod
    def build(cls, command: str, parameters: dict, results: dict) -> "OutputRecord":
        return cls(command, encode_map(parameters), encode_map(results))

    @property
    def key(self) -> str:
        return cache_key(self.command, self.parameters, self.version)

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "OutputRecord":
        return cls(**json.loads(line))


def cache_key(command: str, parameters: dict, version: str = __version__) -> str:
    return json.dumps([command, parameters, version], sort_keys=True)


def csv_columns(records: list[OutputRecord]) -> list[str]:
    cols: list[str] = []
    for rec in records:
        for name in [f"param.{k}" for k in rec.parameters] + [f"result.{k}" for k in rec.results]:
            if name not in cols:
                cols.append(name)
    return ["command", "version", "timestamp"] + cols


def to_csv(records: list[OutputRecord]) -> str:
    buf = io.StringIO()
    cols = csv_columns(records)
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(cols)
    for rec in records:
        row = {"command": rec.command, "version": rec.version, "timestamp": rec.timestamp}
        row.update({f"param.{k}": v for k, v in rec.parameters.items()})
        row.update({f"result.{k}": v for k, v in rec.results.items()})
        writer.writerow(["" if row.get(c) is None else _csv_cell(row[c]) for c in cols])
    return buf.getvalue()


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)  # str(float) is the shortest round-trip form


class ResultCache:
    """Append-only JSON-lines file of OutputRecords."""

    def __init__(self, path: Optional[os.PathLike | str]):
        self.path = Path(path) if path else None
        self._index: dict[str, OutputRecord] = {}
        if self.path and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = OutputRecord.from_json(line)
                        self._index[rec.key] = rec

    @classmethod
    def from_env(cls, path: Optional[str] = None) -> "ResultCache":
        return cls(path or os.environ.get(CACHE_ENV))

    def get(self, command: str, parameters: dict) -> Optional[OutputRecord]:
        return self._index.get(cache_key(command, encode_map(parameters)))

    def put(self, records: Iterable[OutputRecord]) -> None:
        if self.path is None:
            return
        new = [r for r in records if r.key not in self._index]
        if not new:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            for rec in new:
                fh.write(rec.to_json() + "\n")
                self._index[rec.key] = rec
