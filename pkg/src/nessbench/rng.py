"""Named random substreams derived from a single master seed.

``substream(seed, "negsample")`` always yields the same generator for the
same ``(seed, name)`` pair, independent of what other streams consumed.
Stream names used by the toolkit: split, partition, dropedge, negsample,
init, sampler.
"""

from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("split", "partition", "dropedge", "negsample", "init", "sampler")


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def substream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream_key(name)]))
