"""Command-line entry points: serve, replay, sim, report."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .backend import MockCorpus
from .config import ConfigError, EngineConfig, load_config
from .document import LanguageFamily
from .metrics import aggregate, aggregate_sink_files
from .replay import make_corpus_for_file, replay_session
from .server import CompletionEngine, StdioServer
from .simulator import (
    BatchConfig,
    QosMode,
    QosPolicy,
    WorkloadMix,
    run_simulation,
    sample_workload,
)

MOCK_CORPUS_FILENAME = "mock_corpus.jsonl"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 with usage, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scopeline",
                     description="Scope-aware inline completion engine")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the JSON-RPC completion server on stdio")
    serve.add_argument("--config", default=None, help="engine config (TOML)")

    replay = sub.add_parser("replay", help="replay typing sessions and report the funnel")
    replay.add_argument("--dir", default=None, help="directory of ground-truth files")
    replay.add_argument("--file", action="append", default=[],
                        help="individual ground-truth file (repeatable)")
    replay.add_argument("--config", default=None)
    replay.add_argument("--seed", type=int, default=0)
    replay.add_argument("--out", default=None, help="write the metrics report as JSON")
    replay.add_argument("--family", default=None, choices=["indent", "brace"])

    sim = sub.add_parser("sim", help="serving-tier simulator")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    sim_run = sim_sub.add_parser("run", help="run one simulation")
    sim_run.add_argument("--config", default=None)
    sim_run.add_argument("--seed", type=int, default=0)
    sim_run.add_argument("--out", default=None)

    report = sub.add_parser("report", help="aggregate telemetry sinks")
    report.add_argument("--in", dest="inputs", action="append", required=True,
                        help="telemetry sink file (repeatable)")
    report.add_argument("--out", default=None)
    return parser


def _load_config(path: str | None) -> EngineConfig:
    return load_config(path) if path else EngineConfig()


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    server = StdioServer(CompletionEngine(config))
    code = server.run()
    # the reader thread may still be parked on stdin; a buffered read at
    # interpreter shutdown aborts the process, so leave immediately
    sys.stdout.flush()
    sys.stderr.flush()
    os._exit(code)


def _ground_truth_files(args: argparse.Namespace) -> list[str]:
    paths = list(args.file)
    if args.dir:
        for name in sorted(os.listdir(args.dir)):
            if name == MOCK_CORPUS_FILENAME or name.startswith("."):
                continue
            full = os.path.join(args.dir, name)
            if os.path.isfile(full):
                paths.append(full)
    if not paths:
        raise ConfigError("replay needs --dir or --file")
    return paths


def cmd_replay(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    family = LanguageFamily(args.family) if args.family else LanguageFamily(
        config.language_family if config.language_family in ("indent", "brace")
        else "indent")
    paths = _ground_truth_files(args)

    shared_corpus = None
    if args.dir:
        corpus_path = os.path.join(args.dir, MOCK_CORPUS_FILENAME)
        if os.path.exists(corpus_path):
            shared_corpus = MockCorpus.load(corpus_path)

    events = []
    chars_typed = 0
    for i, path in enumerate(paths):
        with open(path, encoding="utf-8") as fh:
            ground_truth = fh.read()
        corpus = shared_corpus or make_corpus_for_file(ground_truth, family)
        session = replay_session(ground_truth, config, corpus,
                                 seed=args.seed + i, family=family,
                                 uri=f"replay://{os.path.basename(path)}")
        if not session.sound:
            print(f"warning: replay of {path} diverged from ground truth",
                  file=sys.stderr)
        events.extend(session.events)
        chars_typed += session.chars_typed

    report = aggregate(events, config.replay.dwell_threshold_ms)
    payload = report.to_dict()
    payload["sessions"] = len(paths)
    _write_json(args.out, payload)
    saved = report.percent_keystrokes_saved
    print(f"replayed {len(paths)} session(s): "
          f"{report.total.displayed} displayed, {report.total.accepted} accepted, "
          f"{saved:.1%} keystrokes saved", file=sys.stderr)
    return 0


def cmd_sim(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    sim = config.sim
    mix = WorkloadMix(
        count=sim.request_count,
        arrival_rate_per_s=sim.arrival_rate_per_s,
        multi_fraction=sim.multi_fraction,
        single_deadline_ms=sim.single_deadline_ms,
        multi_deadline_ms=sim.multi_deadline_ms,
    )
    from .simulator import MULTI, SINGLE

    qos = QosPolicy(
        mode=sim.qos(),
        gestation_ms={SINGLE: sim.gestation_single_ms, MULTI: sim.gestation_multi_ms},
        priority_weights={SINGLE: sim.weight_single, MULTI: sim.weight_multi},
    )
    requests = sample_workload(args.seed, mix)
    report = run_simulation(
        requests,
        workers=sim.workers,
        batch=BatchConfig(sim.max_batch_size),
        qos=qos,
        latency=config.latency.model(),
        streaming_cancel=sim.streaming_cancel,
    )
    _write_json(args.out, report.to_dict())
    total = report.per_kind["total"]
    print(f"simulated {report.arrivals} requests: p50 {total['p50_ms']:.0f} ms, "
          f"timeout rate {total['timeout_rate']:.1%}, "
          f"wasted tokens {report.wasted_tokens}", file=sys.stderr)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    for path in args.inputs:
        if not os.path.exists(path):
            raise ConfigError(f"telemetry sink not found: {path}")
    report = aggregate_sink_files(args.inputs)
    _write_json(args.out, report.to_dict())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "replay":
            return cmd_replay(args)
        if args.command == "sim":
            return cmd_sim(args)
        if args.command == "report":
            return cmd_report(args)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
