"""Result records and their CSV / TSV / JSON serialization.

A record is a table (``columns`` and ``rows``) plus provenance: the
experiment name, the fully resolved configuration, its hash, the master
seed and a timestamp.  Text formats start with ``#`` comment lines carrying
the provenance, so ``gnuplot`` and ``numpy.loadtxt`` skip them.

Timestamps honour ``SOURCE_DATE_EPOCH`` so that re-runs can be compared
byte for byte.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import datetime as _dt
import hashlib
import io
import json
import os
import sys

__all__ = [
    "SCHEMA_VERSION",
    "ResultRecord",
    "config_hash",
    "timestamp",
    "dumps",
    "loads",
    "write_record",
    "read_record",
]

SCHEMA_VERSION = 1
FORMATS = ("csv", "tsv", "json")


def config_hash(config: dict) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON of ``config``."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        now = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        now = _dt.datetime.now(tz=_dt.timezone.utc)
    return now.replace(microsecond=0).isoformat()


@dataclass
class ResultRecord:
    experiment: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    seed: int | None = None
    timestamp: str = field(default_factory=timestamp)
    schema_version: int = SCHEMA_VERSION

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "config": self.config,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResultRecord":
        rec = cls(data["experiment"], data["config"], list(data["columns"]),
                  [list(r) for r in data["rows"]], data.get("seed"), data["timestamp"],
                  data.get("schema_version", SCHEMA_VERSION))
        if "config_hash" in data and data["config_hash"] != rec.config_hash:
            raise ValueError("config_hash does not match the embedded config")
        return rec


def _cell(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def dumps(record: ResultRecord, fmt="csv") -> str:
    if fmt == "json":
        return json.dumps(record.to_dict(), indent=2) + "\n"
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    buf = io.StringIO()
    meta = [
        ("schema_version", record.schema_version),
        ("experiment", record.experiment),
        ("config_hash", record.config_hash),
        ("seed", record.seed),
        ("timestamp", record.timestamp),
        ("config", json.dumps(record.config, sort_keys=True)),
    ]
    for key, value in meta:
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
    writer.writerow(record.columns)
    for row in record.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def loads(text: str, fmt="csv") -> ResultRecord:
    if fmt == "json":
        return ResultRecord.from_dict(json.loads(text))
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line and not body:
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    reader = csv.reader(body, delimiter="," if fmt == "csv" else "\t")
    columns = next(reader)
    rows = [[_parse(c) for c in row] for row in reader]
    seed = None if meta.get("seed") in (None, "None") else int(meta["seed"])
    rec = ResultRecord(meta["experiment"], json.loads(meta["config"]), columns, rows, seed,
                       meta["timestamp"], int(meta["schema_version"]))
    if meta.get("config_hash") != rec.config_hash:
        raise ValueError("config_hash does not match the embedded config")
    return rec


def write_record(record: ResultRecord, path, fmt="csv"):
    """Write to ``path`` (``"-"`` or None for stdout)."""
    text = dumps(record, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def read_record(path, fmt=None) -> ResultRecord:
    if fmt is None:
        fmt = os.path.splitext(str(path))[1].lstrip(".").lower() or "csv"
    with open(path, newline="") as fh:
        return loads(fh.read(), fmt)
