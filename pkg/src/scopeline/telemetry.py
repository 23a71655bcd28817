"""Per-request telemetry events and the append-only sink.

Every request funnel stage becomes one event; field names are stable
because downstream metric aggregation reads sinks written by older
engine builds.  A ``session`` record carries session-level counters
(typed characters) that have no per-request home.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import IO


class TelemetryKind(Enum):
    REQUESTED = "requested"
    DISPLAYED = "displayed"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    INVALIDATED = "invalidated"
    TIMED_OUT = "timed_out"
    SUPPRESSED = "suppressed"
    SESSION = "session"


@dataclass
class TelemetryEvent:
    kind: TelemetryKind
    request_id: str
    suggestion_kind: str = ""  # "single_line" | "multi_line" | ""
    timestamp_ms: float = 0.0
    char_count: int = 0
    latency_ms: float | None = None
    display_duration_ms: float | None = None
    detail: str = ""

    def to_record(self) -> dict:
        record = asdict(self)
        record["kind"] = self.kind.value
        return record

    @classmethod
    def from_record(cls, record: dict) -> "TelemetryEvent":
        return cls(
            kind=TelemetryKind(record["kind"]),
            request_id=str(record["request_id"]),
            suggestion_kind=record.get("suggestion_kind", ""),
            timestamp_ms=float(record.get("timestamp_ms", 0.0)),
            char_count=int(record.get("char_count", 0)),
            latency_ms=record.get("latency_ms"),
            display_duration_ms=record.get("display_duration_ms"),
            detail=record.get("detail", ""),
        )


class TelemetrySink:
    """Collects events in memory and optionally appends them to a file."""

    def __init__(self, path: str | None = None) -> None:
        self.events: list[TelemetryEvent] = []
        self._fh: IO[str] | None = open(path, "a", encoding="utf-8") if path else None

    def emit(self, event: TelemetryEvent) -> None:
        self.events.append(event)
        if self._fh is not None:
            self._fh.write(json.dumps(event.to_record()) + "\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_telemetry(path: str) -> tuple[list[TelemetryEvent], int]:
    """Load a sink file; malformed records are skipped and counted."""
    events: list[TelemetryEvent] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                events.append(TelemetryEvent.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError):
                skipped += 1
    return events, skipped
