"""Reproducible random-number streams.

A stream is identified by a (seed, stream_id) pair. Identical pairs always
produce identical draw sequences; distinct stream_ids give statistically
independent sequences. Replicate r of a named experiment gets a stream id
hashed from the name and index, so replicates reproduce independently of
execution order or worker count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Addressable, reproducible source of numpy generators."""

    seed: int
    stream_id: int = 0

    def generator(self, *key: int) -> np.random.Generator:
        """Generator for this stream, optionally forked by an integer key path.

        Distinct key paths yield independent substreams; the same path always
        yields the same sequence.
        """
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *key))
        return np.random.default_rng(seq)


def stream_for(seed: int, label: str, replicate: int = 0) -> RngStream:
    """Stream for one replicate of a named experiment.

    The stream id is a stable 64-bit hash of (label, replicate), so adding
    or reordering experiments never shifts another experiment's draws.
    """
    digest = hashlib.blake2s(f"{label}:{replicate}".encode(), digest_size=8).digest()
    return RngStream(seed=seed, stream_id=int.from_bytes(digest, "big"))
