"""One master seed, many independent labelled streams."""

from __future__ import annotations

import hashlib
import logging
import secrets

import numpy as np

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def derive_seed(master: int, label: str) -> int:
    """64-bit seed for ``label``, a pure function of ``(master, label)``."""
    h = hashlib.blake2b(digest_size=8, key=b"alignfm")
    h.update((int(master) & MASK64).to_bytes(8, "little"))
    h.update(label.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def rng_for(master: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, label))


def resolve_master(seed: int | None) -> int:
    """Return ``seed``, or draw one from entropy and log it."""
    if seed is not None:
        return int(seed) & MASK64
    drawn = secrets.randbits(64)
    log.warning("no --seed given; drew master seed %d", drawn)
    return drawn
