"""Prime field arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

MAX_MODULUS = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class FieldMismatchError(ValueError):
    """Raised when operands live in different fields."""


@dataclass(frozen=True)
class FieldCtx:
    """The prime field GF(q); calling it wraps an integer as an element."""

    q: int

    def __post_init__(self) -> None:
        if not 2 <= self.q <= MAX_MODULUS:
            raise ValueError(f"modulus {self.q} outside [2, {MAX_MODULUS}]")
        if not is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def __iter__(self) -> Iterator[FieldElement]:
        return (FieldElement(v, self) for v in range(self.q))

    def __repr__(self) -> str:
        return f"GF({self.q})"

    # Integer fast paths used by the matrix code.
    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        return pow(a, -1, self.q)


@dataclass(frozen=True)
class FieldElement:
    value: int
    ctx: FieldCtx

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.ctx.q:
            object.__setattr__(self, "value", self.value % self.ctx.q)

    def _other(self, other: FieldElement | int) -> int:
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise FieldMismatchError(f"{self.ctx} vs {other.ctx}")
            return other.value
        return int(other) % self.ctx.q

    def __add__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.ctx.add(self.value, self._other(other)), self.ctx)

    __radd__ = __add__

    def __sub__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.ctx.sub(self.value, self._other(other)), self.ctx)

    def __rsub__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.ctx.sub(self._other(other), self.value), self.ctx)

    def __mul__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.ctx.mul(self.value, self._other(other)), self.ctx)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElement:
        return FieldElement(self.ctx.neg(self.value), self.ctx)

    def inverse(self) -> FieldElement:
        return FieldElement(self.ctx.inv(self.value), self.ctx)

    def __truediv__(self, other: FieldElement | int) -> FieldElement:
        return self * FieldElement(self.ctx.inv(self._other(other)), self.ctx)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.ctx.q
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.ctx.q))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.ctx.q})"
