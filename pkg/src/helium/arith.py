"""Element-wise 64-bit signed integer arithmetic with scalar broadcast.

Payloads are lists of Python ints; a scalar is a length-1 list.
"""
from __future__ import annotations

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


class Int64Overflow(ArithmeticError):
    pass


def broadcast(a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
    if len(a) == len(b):
        return a, b
    if len(a) == 1:
        return a * len(b), b
    if len(b) == 1:
        return a, b * len(a)
    raise ValueError(f"cannot broadcast lengths {len(a)} and {len(b)}")


def checked(values: list[int]) -> list[int]:
    for v in values:
        if v < INT64_MIN or v > INT64_MAX:
            raise Int64Overflow(f"value {v} exceeds the 64-bit signed range")
    return values


def add(a: list[int], b: list[int]) -> list[int]:
    a, b = broadcast(a, b)
    return checked([x + y for x, y in zip(a, b)])


def sub(a: list[int], b: list[int]) -> list[int]:
    a, b = broadcast(a, b)
    return checked([x - y for x, y in zip(a, b)])


def mul(a: list[int], b: list[int]) -> list[int]:
    a, b = broadcast(a, b)
    return checked([x * y for x, y in zip(a, b)])


def rotate_left(a: list[int], k: int) -> list[int]:
    """``out[i] = a[(i + k) mod len]``."""
    k %= len(a)
    return a[k:] + a[:k]


def rotate_right(a: list[int], k: int) -> list[int]:
    return rotate_left(a, -k)


def power(a: list[int], e: int) -> list[int]:
    return checked([x ** e for x in a])
