"""Deterministic random-stream management.

Every sampling routine in the library draws from a counter-based Philox
generator keyed by ``(master seed, stream labels...)``.  Labels are hashed
with BLAKE2 (not Python's salted ``hash``), so streams are reproducible
across processes and platforms, and two streams with different labels are
statistically independent.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_words(label) -> tuple[int, ...]:
    """Map one label (int or str) to a pair of stable 32-bit words."""
    if isinstance(label, (bool, np.bool_)):
        label = int(label)
    if isinstance(label, (int, np.integer)):
        v = int(label) & (2**64 - 1)
        return (v & 0xFFFFFFFF, (v >> 32) & 0xFFFFFFFF)
    digest = hashlib.blake2s(str(label).encode("utf-8")).digest()
    return (
        int.from_bytes(digest[:4], "little"),
        int.from_bytes(digest[4:8], "little"),
    )


def stream(seed: int, *labels) -> np.random.Generator:
    """Return a Philox generator for the stream ``(seed, *labels)``.

    The same ``(seed, labels)`` pair always produces the identical bit
    stream; distinct labels give independent streams.
    """
    words: list[int] = []
    for lab in labels:
        words.extend(_label_words(lab))
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(words))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *labels) -> int:
    """Derive a 63-bit integer sub-seed from ``(seed, *labels)``.

    Used when an integer seed has to cross an API boundary instead of a
    generator object.
    """
    h = hashlib.blake2s()
    h.update(int(seed).to_bytes(16, "little", signed=True))
    for lab in labels:
        for w in _label_words(lab):
            h.update(w.to_bytes(4, "little"))
    return int.from_bytes(h.digest()[:8], "little") >> 1
