"""Query accounting used to verify sublinearity.

The ledger counts *semantic* queries issued against the sampled data
structures: entry reads, norm evaluations, and index samples.  Hot paths
may serve repeated reads from caches, but they still report the count the
algorithm logically performs, so totals are comparable across problem
sizes.
"""

from __future__ import annotations

import threading


class QueryLedger:
    """Thread-safe counters for entry/norm/sample queries."""

    __slots__ = ("entry_queries", "norm_queries", "samples", "guard_hits", "_lock")

    def __init__(self) -> None:
        self.entry_queries = 0
        self.norm_queries = 0
        self.samples = 0
        self.guard_hits = 0
        self._lock = threading.Lock()

    def add_entries(self, count: int = 1) -> None:
        with self._lock:
            self.entry_queries += count

    def add_norms(self, count: int = 1) -> None:
        with self._lock:
            self.norm_queries += count

    def add_samples(self, count: int = 1) -> None:
        with self._lock:
            self.samples += count

    def add_guard_hits(self, count: int = 1) -> None:
        with self._lock:
            self.guard_hits += count

    @property
    def total(self) -> int:
        return self.entry_queries + self.norm_queries + self.samples

    def snapshot(self) -> dict:
        return {
            "entry_queries": self.entry_queries,
            "norm_queries": self.norm_queries,
            "samples": self.samples,
            "guard_hits": self.guard_hits,
            "total": self.total,
        }

    def reset(self) -> None:
        with self._lock:
            self.entry_queries = 0
            self.norm_queries = 0
            self.samples = 0
            self.guard_hits = 0

    def __repr__(self) -> str:
        return (
            f"QueryLedger(entries={self.entry_queries}, norms={self.norm_queries}, "
            f"samples={self.samples})"
        )
