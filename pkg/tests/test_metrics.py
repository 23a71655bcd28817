"""Funnel arithmetic against hand-computed fixtures."""

from __future__ import annotations

import json

import pytest

from scopeline import TelemetryEvent, TelemetryKind, aggregate, aggregate_sink_files
from scopeline.telemetry import TelemetrySink, read_telemetry

K = TelemetryKind


def ev(kind, rid, skind="", chars=0, latency=None, dwell=None, ts=0.0):
    return TelemetryEvent(kind=kind, request_id=rid, suggestion_kind=skind,
                          timestamp_ms=ts, char_count=chars, latency_ms=latency,
                          display_duration_ms=dwell)


def twenty_event_fixture() -> list[TelemetryEvent]:
    return [
        ev(K.REQUESTED, "r1"),
        ev(K.DISPLAYED, "r1", "single_line", chars=10, latency=200),
        ev(K.ACCEPTED, "r1", "single_line", chars=10, dwell=900),
        ev(K.REQUESTED, "r2"),
        ev(K.DISPLAYED, "r2", "multi_line", chars=40, latency=800),
        ev(K.ACCEPTED, "r2", "multi_line", chars=40, dwell=700),
        ev(K.REQUESTED, "r3"),
        ev(K.DISPLAYED, "r3", "single_line", chars=12, latency=150),
        ev(K.REJECTED, "r3", "single_line", chars=12, dwell=1000),
        ev(K.REQUESTED, "r4"),
        ev(K.SUPPRESSED, "r4"),
        ev(K.REQUESTED, "r5"),
        ev(K.INVALIDATED, "r5"),
        ev(K.REQUESTED, "r6"),
        ev(K.TIMED_OUT, "r6", "multi_line"),
        ev(K.REQUESTED, "r7"),
        ev(K.DISPLAYED, "r7", "multi_line", chars=33, latency=900),
        ev(K.REQUESTED, "r8"),
        ev(K.DISPLAYED, "r8", "single_line", chars=7, latency=100),
        ev(K.SESSION, "session", chars=150),
    ]


def test_twenty_event_fixture_hand_computed():
    events = twenty_event_fixture()
    assert len(events) == 20
    report = aggregate(events)

    assert report.total.requested == 8
    assert report.total.displayed == 5
    assert report.total.accepted == 2
    assert report.total.chars_accepted == 50
    assert report.chars_typed == 150
    assert report.percent_keystrokes_saved == pytest.approx(50 / 200)

    # dwell rule: r2's 700 ms display is under the 750 ms threshold;
    # r7/r8 were never dismissed and stay in the denominator
    assert report.total.displayed_over_threshold == 4
    assert report.total.accepted_over_threshold == 1
    assert report.total.acceptance_rate == pytest.approx(0.25)

    single = report.by_kind["single_line"]
    multi = report.by_kind["multi_line"]
    assert single.displayed == 3 and multi.displayed == 2
    assert single.accepted == 1 and multi.accepted == 1
    assert single.chars_accepted == 10 and multi.chars_accepted == 40
    assert single.displayed_over_threshold == 3
    assert multi.displayed_over_threshold == 1
    assert single.acceptance_rate == pytest.approx(1 / 3)
    assert multi.acceptance_rate == 0.0

    assert report.share_of_displays("single_line") == pytest.approx(0.6)
    assert report.share_of_displays("multi_line") == pytest.approx(0.4)
    assert report.share_of_accepted_chars("single_line") == pytest.approx(0.2)
    assert report.share_of_accepted_chars("multi_line") == pytest.approx(0.8)

    assert report.total.to_dict()["latency_p50_ms"] == 200
    assert report.suppressed == 1
    assert report.invalidated == 1
    assert report.timed_out == 1


def test_acceptance_rate_29_percent_fixture():
    events = []
    for i in range(100):
        rid = f"r{i}"
        events.append(ev(K.REQUESTED, rid))
        events.append(ev(K.DISPLAYED, rid, "single_line", chars=10, latency=250))
        if i < 29:
            events.append(ev(K.ACCEPTED, rid, "single_line", chars=10, dwell=1000))
        else:
            events.append(ev(K.REJECTED, rid, "single_line", chars=10, dwell=1000))
    report = aggregate(events)
    assert report.total.displayed == 100
    assert report.total.displayed_over_threshold == 100
    assert report.total.acceptance_rate == pytest.approx(0.29)


def test_display_and_accepted_char_share_fixture():
    # 84 single / 16 multi displays; 580 single / 420 multi accepted chars
    events = []
    rid = 0
    for _ in range(84):
        events.append(ev(K.DISPLAYED, f"s{rid}", "single_line", latency=100))
        rid += 1
    for _ in range(16):
        events.append(ev(K.DISPLAYED, f"m{rid}", "multi_line", latency=500))
        rid += 1
    events.append(ev(K.ACCEPTED, "s0", "single_line", chars=580, dwell=900))
    events.append(ev(K.ACCEPTED, f"m{rid-1}", "multi_line", chars=420, dwell=900))
    report = aggregate(events)
    assert report.share_of_displays("multi_line") == pytest.approx(0.16)
    assert report.share_of_accepted_chars("multi_line") == pytest.approx(0.42)


def test_zero_events_is_all_zero_report():
    report = aggregate([])
    assert report.total.displayed == 0
    assert report.total.acceptance_rate == 0.0
    assert report.percent_keystrokes_saved == 0.0
    payload = report.to_dict()
    assert payload["total"]["requested"] == 0


def test_rates_and_shares_are_bounded():
    report = aggregate(twenty_event_fixture())
    assert 0.0 <= report.total.acceptance_rate <= 1.0
    assert 0.0 <= report.percent_keystrokes_saved <= 1.0
    shares = [report.share_of_displays(k) for k in ("single_line", "multi_line")]
    assert sum(shares) == pytest.approx(1.0)
    char_shares = [report.share_of_accepted_chars(k)
                   for k in ("single_line", "multi_line")]
    assert sum(char_shares) == pytest.approx(1.0)


def test_recomputation_from_raw_sink_is_idempotent(tmp_path):
    path = str(tmp_path / "sink.jsonl")
    sink = TelemetrySink(path)
    for event in twenty_event_fixture():
        sink.emit(event)
    sink.close()

    first = aggregate_sink_files([path]).to_dict()
    second = aggregate_sink_files([path]).to_dict()
    assert first == second
    in_memory = aggregate(twenty_event_fixture()).to_dict()
    assert first == in_memory


def test_malformed_records_are_counted_and_skipped(tmp_path):
    path = str(tmp_path / "sink.jsonl")
    with open(path, "w") as fh:
        fh.write(json.dumps(ev(K.REQUESTED, "r1").to_record()) + "\n")
        fh.write("this is not json\n")
        fh.write(json.dumps({"kind": "bogus-kind", "request_id": "x"}) + "\n")
        fh.write(json.dumps(ev(K.DISPLAYED, "r1", "single_line",
                               latency=100).to_record()) + "\n")
    events, skipped = read_telemetry(path)
    assert len(events) == 2
    assert skipped == 2
    report = aggregate_sink_files([path])
    assert report.malformed_records == 2
    assert report.total.displayed == 1
