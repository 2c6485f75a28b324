"""Small helpers for events stored as Python int bitmasks."""

from __future__ import annotations

from typing import Iterable, Iterator


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in ascending numeric order."""
    bits = list(iter_bits(mask))
    for k in range(1 << len(bits)):
        yield deposit(k, bits)


def deposit(local: int, bits: list[int]) -> int:
    """Scatter the low bits of ``local`` onto the positions in ``bits``."""
    out = 0
    i = 0
    while local:
        if local & 1:
            out |= 1 << bits[i]
        local >>= 1
        i += 1
    return out


def extract(mask: int, bits: list[int]) -> int:
    """Inverse of :func:`deposit` for masks contained in ``bits``."""
    out = 0
    for i, b in enumerate(bits):
        if mask >> b & 1:
            out |= 1 << i
    return out


def gray(i: int) -> int:
    return i ^ (i >> 1)


def span(generators: Iterable[int]) -> set[int]:
    """GF(2) linear span of a family of masks."""
    out = {0}
    for g in generators:
        if g and g not in out:
            out |= {x ^ g for x in out}
    return out


def minimal_sets(masks: Iterable[int]) -> list[int]:
    """Inclusion-minimal elements of a family of masks, sorted ascending."""
    kept: list[int] = []
    for m in sorted(set(masks), key=lambda x: (popcount(x), x)):
        if not any(k & ~m == 0 for k in kept):
            kept.append(m)
    return sorted(kept)
