"""Deterministic per-component random streams.

A run has one 64-bit seed. Each component draws from the stream
``SeedSequence(seed, spawn_key=(crc32(name),) + labels)``, so adding or
reordering components never shifts another component's numbers.
"""

import zlib

import numpy as np

__all__ = ["component_rng", "stream_key"]


def stream_key(name):
    """Stable 32-bit index for a component name."""
    return zlib.crc32(str(name).encode("utf-8")) & 0xFFFFFFFF


def component_rng(seed, name, *labels):
    """Generator for component ``name`` with optional integer ``labels``."""
    key = (stream_key(name),) + tuple(int(x) & 0xFFFFFFFF for x in labels)
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=key)
    return np.random.default_rng(ss)
