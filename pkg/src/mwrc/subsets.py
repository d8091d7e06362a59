"""Bitmask helpers for subsets of users {1..L}.

User ``i`` (1-based) is bit ``i - 1``.  All iteration is in ascending mask
order so that anything built on top of it is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def full_mask(L: int) -> int:
    return (1 << L) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def members(mask: int) -> list[int]:
    """0-based indices of the users in ``mask``."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(users: Iterable[int]) -> int:
    """Mask from 1-based user labels."""
    mask = 0
    for u in users:
        mask |= 1 << (u - 1)
    return mask


def nonempty(L: int) -> range:
    return range(1, 1 << L)


def strict_nonempty(L: int) -> range:
    return range(1, (1 << L) - 1)


def submasks(mask: int) -> Iterator[int]:
    """Nonempty submasks of ``mask`` in ascending order."""
    found = []
    sub = mask
    while sub:
        found.append(sub)
        sub = (sub - 1) & mask
    yield from reversed(found)


def of_weight(L: int, k: int) -> list[int]:
    return [s for s in nonempty(L) if popcount(s) == k]


def label(mask: int) -> str:
    """Human form, e.g. ``{1,3}``."""
    return "{" + ",".join(str(i + 1) for i in members(mask)) + "}"
