"""Funnel metrics over telemetry events.

The funnel reads: requests at the top, suggestions displayed, then
accepted, ending in the share of document content that arrived through
acceptances instead of keystrokes.  Acceptance rate counts only
suggestions that stayed visible beyond a dwell threshold (default
750 ms); the numerator is restricted to the same population so the rate
is bounded by 1.

The keystrokes-saved denominator includes accepted characters:
``chars_accepted / (chars_accepted + chars_typed)`` is the share of all
entered content, so it is also bounded by 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .telemetry import TelemetryEvent, TelemetryKind

DWELL_THRESHOLD_MS = 750.0

_KINDS = ("single_line", "multi_line")


@dataclass
class KindFunnel:
    requested: int = 0
    displayed: int = 0
    accepted: int = 0
    displayed_over_threshold: int = 0
    accepted_over_threshold: int = 0
    chars_accepted: int = 0
    latencies_ms: list[float] = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        if self.displayed_over_threshold == 0:
            return 0.0
        return self.accepted_over_threshold / self.displayed_over_threshold

    def to_dict(self) -> dict:
        return {
            "requested": self.requested,
            "displayed": self.displayed,
            "accepted": self.accepted,
            "displayed_over_threshold": self.displayed_over_threshold,
            "accepted_over_threshold": self.accepted_over_threshold,
            "acceptance_rate": self.acceptance_rate,
            "chars_accepted": self.chars_accepted,
            "latency_p50_ms": _percentile(self.latencies_ms, 0.50),
            "latency_p90_ms": _percentile(self.latencies_ms, 0.90),
            "latency_p99_ms": _percentile(self.latencies_ms, 0.99),
        }


@dataclass
class MetricsReport:
    total: KindFunnel
    by_kind: dict[str, KindFunnel]
    chars_typed: int
    invalidated: int
    timed_out: int
    suppressed: int
    malformed_records: int = 0

    @property
    def percent_keystrokes_saved(self) -> float:
        entered = self.total.chars_accepted + self.chars_typed
        if entered == 0:
            return 0.0
        return self.total.chars_accepted / entered

    def share_of_displays(self, kind: str) -> float:
        if self.total.displayed == 0:
            return 0.0
        return self.by_kind[kind].displayed / self.total.displayed

    def share_of_accepted_chars(self, kind: str) -> float:
        if self.total.chars_accepted == 0:
            return 0.0
        return self.by_kind[kind].chars_accepted / self.total.chars_accepted

    def to_dict(self) -> dict:
        return {
            "total": self.total.to_dict(),
            "by_kind": {
                kind: {
                    **funnel.to_dict(),
                    "share_of_displays": self.share_of_displays(kind),
                    "share_of_accepted_chars": self.share_of_accepted_chars(kind),
                }
                for kind, funnel in self.by_kind.items()
            },
            "chars_typed": self.chars_typed,
            "percent_keystrokes_saved": self.percent_keystrokes_saved,
            "invalidated": self.invalidated,
            "timed_out": self.timed_out,
            "suppressed": self.suppressed,
            "malformed_records": self.malformed_records,
        }


def _percentile(values: list[float], q: float) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = max(0, min(len(ordered) - 1, math.ceil(q * len(ordered)) - 1))
    return ordered[rank]


def aggregate(
    events: list[TelemetryEvent],
    dwell_threshold_ms: float = DWELL_THRESHOLD_MS,
    chars_typed: int = 0,
    malformed_records: int = 0,
) -> MetricsReport:
    """Compute the funnel from raw telemetry.

    A display with no recorded duration never got dismissed and counts
    as over-threshold.  Typed-character counts ride in on ``session``
    records and/or the explicit argument.
    """
    total = KindFunnel()
    by_kind = {kind: KindFunnel() for kind in _KINDS}
    invalidated = timed_out = suppressed = 0
    # display durations arrive on the follow-up event for a request
    display_dwell: dict[str, float | None] = {}
    displayed_requests: dict[str, str] = {}

    for event in events:
        if event.kind is TelemetryKind.SESSION:
            chars_typed += event.char_count
            continue
        kind = event.suggestion_kind if event.suggestion_kind in by_kind else None
        buckets = [total] + ([by_kind[kind]] if kind else [])
        if event.kind is TelemetryKind.REQUESTED:
            for b in buckets:
                b.requested += 1
        elif event.kind is TelemetryKind.DISPLAYED:
            displayed_requests[event.request_id] = kind or ""
            display_dwell.setdefault(event.request_id, None)
            for b in buckets:
                b.displayed += 1
                if event.latency_ms is not None:
                    b.latencies_ms.append(event.latency_ms)
        elif event.kind is TelemetryKind.ACCEPTED:
            display_dwell[event.request_id] = event.display_duration_ms
            over = (event.display_duration_ms is None
                    or event.display_duration_ms > dwell_threshold_ms)
            for b in buckets:
                b.accepted += 1
                b.chars_accepted += event.char_count
                if over:
                    b.accepted_over_threshold += 1
        elif event.kind is TelemetryKind.REJECTED:
            display_dwell[event.request_id] = event.display_duration_ms
        elif event.kind is TelemetryKind.INVALIDATED:
            invalidated += 1
        elif event.kind is TelemetryKind.TIMED_OUT:
            timed_out += 1
        elif event.kind is TelemetryKind.SUPPRESSED:
            suppressed += 1

    for request_id, kind in displayed_requests.items():
        dwell = display_dwell.get(request_id)
        if dwell is None or dwell > dwell_threshold_ms:
            total.displayed_over_threshold += 1
            if kind in by_kind:
                by_kind[kind].displayed_over_threshold += 1

    return MetricsReport(
        total=total,
        by_kind=by_kind,
        chars_typed=chars_typed,
        invalidated=invalidated,
        timed_out=timed_out,
        suppressed=suppressed,
        malformed_records=malformed_records,
    )


def aggregate_sink_files(paths: list[str],
                         dwell_threshold_ms: float = DWELL_THRESHOLD_MS) -> MetricsReport:
    from .telemetry import read_telemetry

    events: list[TelemetryEvent] = []
    malformed = 0
    for path in paths:
        file_events, skipped = read_telemetry(path)
        events.extend(file_events)
        malformed += skipped
    return aggregate(events, dwell_threshold_ms, malformed_records=malformed)
