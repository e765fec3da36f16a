"""Named, order-independent random streams and the blocked trial loop.

Every random draw in the toolkit descends from one integer master seed.
A stream is addressed by a path of names (``"prop2", "M:64", "block", 3,
"aoa"``); the path is hashed into a :class:`numpy.random.SeedSequence`
spawn key, so the draws of one path never depend on which other paths were
used, or in which order.

Monte Carlo trials are processed in fixed blocks of :data:`BLOCK_TRIALS`.
Block ``b`` always covers trials ``[b*BLOCK_TRIALS, (b+1)*BLOCK_TRIALS)``
and always uses the stream ``(..., "block", b)``, which is what makes the
results identical for any number of worker threads.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

BLOCK_TRIALS = 256

_KEY_MASK = (1 << 32) - 1


def _word(name) -> int:
    if isinstance(name, (int, np.integer)) and not isinstance(name, bool) and name >= 0:
        return int(name) & _KEY_MASK
    digest = hashlib.blake2b(str(name).encode(), digest_size=4).digest()
    return int.from_bytes(digest, "little")


class SeedStreams:
    """Hierarchical stream namespace rooted at a master seed."""

    def __init__(self, master_seed: int, path: tuple = ()):
        if isinstance(master_seed, bool) or not isinstance(master_seed, (int, np.integer)):
            raise TypeError(f"master seed must be an integer, got {master_seed!r}")
        self.master_seed = int(master_seed)
        self.path = tuple(path)

    def __repr__(self):
        return f"SeedStreams({self.master_seed}, {self.path!r})"

    def child(self, *names) -> "SeedStreams":
        return SeedStreams(self.master_seed, self.path + names)

    def seed_sequence(self, *names) -> np.random.SeedSequence:
        # typed tag words keep "3" and 3 apart
        key = []
        for name in self.path + names:
            key.append(0 if isinstance(name, (int, np.integer)) else 1)
            key.append(_word(name))
        return np.random.SeedSequence(self.master_seed & ((1 << 64) - 1), spawn_key=tuple(key))

    def generator(self, *names) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*names)))


def as_streams(rng) -> SeedStreams:
    """Accept a master seed or an existing :class:`SeedStreams`."""
    if isinstance(rng, SeedStreams):
        return rng
    return SeedStreams(rng)


def block_sizes(trials: int, block: int = BLOCK_TRIALS) -> list[int]:
    full, rest = divmod(trials, block)
    return [block] * full + ([rest] if rest else [])


def run_blocks(trials: int, streams: SeedStreams,
               fn: Callable[[int, np.random.Generator, np.random.Generator], np.ndarray],
               workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(n, aoa_rng, gain_rng)`` per block and concatenate.

    ``fn`` returns an array whose first axis has length ``n``. Blocks are
    joined in index order whatever ``workers`` is.
    """
    sizes = block_sizes(trials)

    def one(b):
        return fn(sizes[b],
                  streams.generator("block", b, "aoa"),
                  streams.generator("block", b, "gains"))

    if workers <= 1 or len(sizes) <= 1:
        parts = [one(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    return np.concatenate(parts, axis=0)
