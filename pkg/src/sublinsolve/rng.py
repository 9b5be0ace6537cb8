"""Deterministic named random streams.

All randomness in a run flows from one 64-bit seed.  Independent
subsystems (row sampling, column sampling, per-group estimator draws,
rejection sampling, instance generation) each pull a named stream so that
parallel workers and reordered phases cannot perturb each other's draws.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_MASK = (1 << 64) - 1


def _name_key(name: str) -> int:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Return a Generator keyed by (seed, name), stable across runs."""
    ss = np.random.SeedSequence([seed & _SEED_MASK, _name_key(name)])
    return np.random.default_rng(ss)


def spawn_streams(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    """Split `rng` into `count` independent child generators."""
    return list(rng.spawn(count))
