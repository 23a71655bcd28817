"""Walkthrough: replaying typing sessions and the metrics funnel.

Types the bundled ground-truth files character by character against the
engine with a deterministic corpus backend.  A suggestion only gets
displayed when its simulated latency beats the next keystroke, and an
oracle accepts it only when it matches the file being typed, so the
funnel numbers respond to latency the way a live fleet's would.
"""

import glob
import os

from scopeline import EngineConfig, LanguageFamily, aggregate
from scopeline.replay import make_corpus_for_file, replay_session

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus")


def run(multi_line: bool, latency_scale: float):
    events = []
    for i, path in enumerate(sorted(glob.glob(os.path.join(CORPUS_DIR, "*.py")))):
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        config = EngineConfig()
        config.trigger.multi_line_enabled = multi_line
        config.latency.scale = latency_scale
        corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
        session = replay_session(text, config, corpus, seed=7 + i)
        assert session.sound  # the finished buffer equals the file
        events.extend(session.events)
    return aggregate(events)


def main():
    print("Single-line only vs multi-line enabled (default latency):")
    off = run(multi_line=False, latency_scale=1.0)
    on = run(multi_line=True, latency_scale=1.0)
    for tag, report in (("single-line only", off), ("multi-line enabled", on)):
        print(f"  {tag:20s} displayed={report.total.displayed:3d} "
              f"accepted={report.total.accepted:3d} "
              f"chars={report.total.chars_accepted:5d} "
              f"saved={report.percent_keystrokes_saved:6.1%}")
    print(f"  multi-line share of displays:       "
          f"{on.share_of_displays('multi_line'):.0%}")
    print(f"  multi-line share of accepted chars: "
          f"{on.share_of_accepted_chars('multi_line'):.0%}\n")

    print("Display rate vs latency (the funnel's guardrail):")
    for scale in (1.0, 2.0, 4.0, 8.0):
        report = run(multi_line=True, latency_scale=scale)
        print(f"  latency x{scale:<4.1f} displayed={report.total.displayed:3d} "
              f"accepted={report.total.accepted:3d} "
              f"saved={report.percent_keystrokes_saved:6.1%}")


if __name__ == "__main__":
    main()
