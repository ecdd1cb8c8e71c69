"""Bitset helpers. Vertex sets are Python ints with bit v set for vertex v."""

from typing import Iterable, Iterator


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def members(mask: int) -> list[int]:
    return list(iter_bits(mask))


def popcount(mask: int) -> int:
    return mask.bit_count()


def lowest(mask: int) -> int:
    """Smallest vertex in a non-empty mask."""
    return (mask & -mask).bit_length() - 1
