"""Per-purpose random streams.

Every run draws from independent Philox (counter-based) generators keyed by
``hash64(master_seed, run_index, purpose)``, so changing how much one
consumer draws never shifts another consumer's sequence.
"""

from __future__ import annotations

import hashlib

import numpy as np

PURPOSES = ("env", "disclose", "observe", "init", "perturb", "sample")


def hash64(*parts) -> int:
    text = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def derive_seed(master_seed: int, run_index: int, purpose: str) -> int:
    return hash64(int(master_seed), int(run_index), purpose)


def stream(master_seed: int, run_index: int, purpose: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(master_seed, run_index, purpose)))


def run_streams(master_seed: int, run_index: int) -> dict[str, np.random.Generator]:
    return {p: stream(master_seed, run_index, p) for p in PURPOSES}
