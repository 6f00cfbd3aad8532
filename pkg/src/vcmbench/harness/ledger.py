"""Append-only JSONL run ledger with config-hash resume.

Line 1 is a header record carrying the schema version and the config
hash.  Every subsequent line is one (codec, q, image) work item with its
status, bit count, and metric values.  Appends are serialized through a
lock and flushed per line, so a crash loses at most the line being
written; unparseable trailing lines are dropped on load.  Re-running
with the same config hash resumes: completed items are skipped, failed
ones retried, and for duplicate keys the last line wins.

PSNR can be infinite (identical reconstruction); JSON has no infinity,
so infinite values are stored as the string ``"inf"``.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

SCHEMA_VERSION = 1

STATUS_OK = "ok"
STATUS_FAILED = "failed"


def _encode_value(value: float) -> float | str:
    return "inf" if value == math.inf else value


def _decode_value(value) -> float:
    return math.inf if value == "inf" else float(value)


@dataclass(frozen=True)
class LedgerRow:
    """One (codec, q, image) work item."""

    codec: str
    q: int
    image_id: str
    status: str
    bits: int | None = None
    pixels: int | None = None
    metrics: dict[str, float] | None = None
    error: str | None = None

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.codec, self.q, self.image_id)

    def to_json(self) -> str:
        record = {
            "kind": "row",
            "codec": self.codec,
            "q": self.q,
            "image_id": self.image_id,
            "status": self.status,
            "bits": self.bits,
            "pixels": self.pixels,
            "metrics": (
                None
                if self.metrics is None
                else {k: _encode_value(v) for k, v in sorted(self.metrics.items())}
            ),
            "error": self.error,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_record(cls, record: dict) -> "LedgerRow":
        metrics = record.get("metrics")
        return cls(
            codec=record["codec"],
            q=int(record["q"]),
            image_id=record["image_id"],
            status=record["status"],
            bits=record.get("bits"),
            pixels=record.get("pixels"),
            metrics=(
                None
                if metrics is None
                else {k: _decode_value(v) for k, v in metrics.items()}
            ),
            error=record.get("error"),
        )


class RunLedger:
    """JSONL-backed result store for one experiment."""

    def __init__(self, path: str | Path, config_hash: str):
        self.path = Path(path)
        self.config_hash = config_hash
        self._lock = threading.Lock()
        self._rows: dict[tuple[str, int, str], LedgerRow] = {}
        self._load_or_start()

    def _load_or_start(self) -> None:
        if self.path.is_file():
            header, rows = _read_file(self.path)
            if header is not None and header.get("config_hash") == self.config_hash:
                self._rows = {row.key: row for row in rows}
                return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "kind": "header",
            "schema": SCHEMA_VERSION,
            "config_hash": self.config_hash,
        }
        with open(self.path, "w", encoding="utf-8") as f:
            f.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")

    def append(self, row: LedgerRow) -> None:
        """Record one finished work item (thread-safe)."""
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(row.to_json() + "\n")
                f.flush()
            self._rows[row.key] = row

    def get(self, codec: str, q: int, image_id: str) -> LedgerRow | None:
        return self._rows.get((codec, q, image_id))

    def rows(self) -> list[LedgerRow]:
        """Current state, one row per key, deterministically sorted."""
        return sorted(self._rows.values(), key=lambda r: r.key)

    def ok_rows(self) -> list[LedgerRow]:
        return [r for r in self.rows() if r.status == STATUS_OK]


def _read_file(path: Path) -> tuple[dict | None, list[LedgerRow]]:
    header: dict | None = None
    rows: list[LedgerRow] = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn write from a crashed run
            if i == 0 and record.get("kind") == "header":
                if record.get("schema") != SCHEMA_VERSION:
                    return None, []
                header = record
            elif record.get("kind") == "row":
                try:
                    rows.append(LedgerRow.from_record(record))
                except (KeyError, TypeError, ValueError):
                    continue
    return header, rows


def load_ledger(path: str | Path, config_hash: str) -> RunLedger:
    """Open (resuming) or create the ledger for this config hash."""
    return RunLedger(path, config_hash)


def read_completed_rows(path: str | Path, config_hash: str) -> list[LedgerRow]:
    """Read-only view of the ok rows, for report commands.

    Unlike RunLedger, never creates or truncates anything: a missing
    file or a hash mismatch is an error telling the user to re-sweep.
    """
    from vcmbench.errors import ConfigError

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no run ledger at {path}; run 'vcmbench sweep' first")
    header, rows = _read_file(path)
    if header is None:
        raise ConfigError(f"{path}: unreadable ledger header")
    if header.get("config_hash") != config_hash:
        raise ConfigError(
            f"{path} was produced by a different config; re-run 'vcmbench sweep'"
        )
    last = {row.key: row for row in rows}
    return sorted(
        (r for r in last.values() if r.status == STATUS_OK), key=lambda r: r.key
    )
