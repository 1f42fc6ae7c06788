"""Deterministic randomness and order-preserving parallel maps.

Every trial draws from its own generator seeded by hash(root, index), so
results do not depend on how trials are split across workers.
"""
from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor


def trial_seed(root: int, index: int, stream: str = "") -> int:
    h = hashlib.blake2b(f"{stream}:{root}:{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def trial_rng(root: int, index: int, stream: str = "") -> random.Random:
    return random.Random(trial_seed(root, index, stream))


def chunk_ranges(total: int, chunks: int) -> list[tuple[int, int]]:
    chunks = max(1, min(chunks, total)) if total else 1
    step, extra = divmod(total, chunks)
    out, start = [], 0
    for c in range(chunks):
        end = start + step + (1 if c < extra else 0)
        out.append((start, end))
        start = end
    return out


def parallel_map(fn, items, workers: int = 1) -> list:
    """map(fn, items) with results in input order; fn must be picklable."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
