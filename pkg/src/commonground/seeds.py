"""Deterministic child-seed derivation so parallel runs stay reproducible."""

from __future__ import annotations

import hashlib

GENERATOR_VERSION = "mt19937-v1"


def derive_seed(*parts: object) -> int:
    """Map a tuple of identifying parts to a stable 63-bit seed."""
    key = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
