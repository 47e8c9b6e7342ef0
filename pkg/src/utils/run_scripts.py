# src/utils/run_scripts.py

"""Progress and timing helpers shared by the command scripts."""

import time
from contextlib import contextmanager
from typing import Iterator, List, Tuple


class StepTimer:
    """Collects (label, seconds, status) for a closing timing summary."""

    def __init__(self):
        self.timings: List[Tuple[str, float, str]] = []

    @contextmanager
    def step(self, label: str) -> Iterator[None]:
        print(f"🚀 {label}")
        start = time.perf_counter()
        status = "failed"
        try:
            yield
            status = "ok"
        finally:
            elapsed = time.perf_counter() - start
            self.timings.append((label, elapsed, status))
            print(f"⏱️ {label} finished in {elapsed:.1f}s ({status})")

    def summary(self, title: str = "TIMING SUMMARY") -> None:
        if not self.timings:
            return
        print(f"\n📊 {title}")
        for label, elapsed, status in sorted(self.timings, key=lambda x: x[1], reverse=True):
            print(f"{elapsed:7.1f}s  {status:6}  {label}")
        total = sum(t for _, t, _ in self.timings)
        print(f"⏱️ TOTAL: {total:.1f}s")
