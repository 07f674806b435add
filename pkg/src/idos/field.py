"""Arithmetic in GF(2^d) for arbitrary degree d.

Elements are Python ints whose bit ``i`` is the coefficient of ``x^i``.
The generator ``alpha`` is always the residue class of ``x``, so
``alpha**e`` for ``e < d`` is simply the monomial ``1 << e``.

Hot paths (linear algebra, encoding) work on raw ints through the
``FieldCtx`` methods; ``FieldElement`` wraps an int together with its
context for the public, context-checked API.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

NEG_INF = None  # exponent sentinel: alpha^{-inf} == 0


class FieldError(ValueError):
    pass


class ProvidedModulusReducible(FieldError):
    pass


class DegreeMismatch(FieldError):
    pass


class SearchExhausted(FieldError):
    pass


class ContextMismatch(FieldError):
    pass


# -- GF(2)[x] helpers on ints ------------------------------------------------

_SPREAD = np.array(
    [sum(((b >> i) & 1) << (2 * i) for i in range(8)) for b in range(256)],
    dtype="<u2",
)


def poly_from_exponents(exponents: Iterable[int]) -> int:
    p = 0
    for e in exponents:
        if e < 0:
            raise ValueError(f"negative exponent {e}")
        p ^= 1 << e
    return p


def poly_exponents(p: int) -> list[int]:
    """Exponents with coefficient 1, strictly descending."""
    out = []
    while p:
        e = p.bit_length() - 1
        out.append(e)
        p ^= 1 << e
    return out


def poly_square(a: int) -> int:
    """Square in GF(2)[x] by interleaving zero bits."""
    if a == 0:
        return 0
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    spread = _SPREAD[np.frombuffer(raw, dtype=np.uint8)]
    return int.from_bytes(spread.tobytes(), "little")


def poly_mul(a: int, b: int) -> int:
    """Carry-less product."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    r = 0
    while b:
        low = b & -b
        r ^= a << (low.bit_length() - 1)
        b ^= low
    return r


def poly_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    if dm == 0:
        raise ZeroDivisionError("polynomial modulus is zero")
    la = a.bit_length()
    while la >= dm:
        a ^= m << (la - dm)
        la = a.bit_length()
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _fold_mod_frobenius(f: int, i: int) -> int:
    """``f mod (x^(2^i) + x)`` using ``x^(2^i) == x``."""
    width = 1 << i
    mask = (1 << width) - 1
    while f.bit_length() > width:
        f = (f & mask) ^ ((f >> width) << 1)
    return f


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


# -- irreducibility ----------------------------------------------------------

# Small Frobenius sieve: most reducible candidates have a low-degree factor,
# and gcd against x^(2^i) + x is cheap once f is folded below degree 2^i.
_SIEVE_DEPTH = 8


def _reduce_sparse(a: int, d: int, low: Sequence[int]) -> int:
    mask = (1 << d) - 1
    while a.bit_length() > d:
        hi = a >> d
        a &= mask
        for e in low:
            a ^= hi << e
    return a


def irreducibility_test(modulus: Iterable[int], d: int) -> bool:
    """Rabin's test: x^(2^d) == x mod f and gcd(x^(2^(d/r)) - x, f) == 1
    for every prime r dividing d."""
    exps = tuple(sorted(set(modulus), reverse=True))
    if not exps or exps[0] != d:
        raise DegreeMismatch(f"modulus degree {exps[0] if exps else None} != {d}")
    if d < 1:
        raise DegreeMismatch("degree must be positive")
    f = poly_from_exponents(exps)
    if d == 1:
        return True
    if not f & 1:
        return False  # divisible by x
    if len(exps) % 2 == 0:
        return False  # even weight: f(1) == 0
    for i in range(1, min(_SIEVE_DEPTH, d // 2) + 1):
        q = (1 << (1 << i)) | 0b10
        if poly_gcd(q, _fold_mod_frobenius(f, i)) != 1:
            return False

    low = exps[1:]
    checkpoints = {d // r for r in _prime_factors(d)}
    h = 0b10
    for i in range(1, d + 1):
        h = _reduce_sparse(poly_square(h), d, low)
        if i in checkpoints and i < d:
            if poly_gcd(f, h ^ 0b10) != 1:
                return False
    return h == 0b10


def _candidate_moduli(d: int, rng: random.Random, max_attempts: int):
    tried = 0
    # trinomials; none are irreducible when 8 | d (Swan)
    if d % 8 != 0:
        middles = list(range(1, d // 2 + 1))
        rng.shuffle(middles)
        for a in middles:
            if tried >= max_attempts:
                return
            tried += 1
            yield (d, a, 0)
    seen = set()
    while tried < max_attempts and d >= 4:
        mids = tuple(sorted(rng.sample(range(1, d), 3), reverse=True))
        if mids in seen:
            if len(seen) >= (d - 1) * (d - 2) * (d - 3) // 6:
                return
            continue
        seen.add(mids)
        tried += 1
        yield (d,) + mids + (0,)


# -- contexts and elements ---------------------------------------------------


@dataclass(frozen=True)
class FieldCtx:
    """GF(2^d) defined by a monic irreducible modulus; alpha is x."""

    degree: int
    modulus: tuple[int, ...]
    _poly: int = field(init=False, repr=False, compare=False)
    _low: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "modulus", tuple(sorted(set(self.modulus), reverse=True)))
        if self.modulus[0] != self.degree:
            raise DegreeMismatch(f"modulus degree {self.modulus[0]} != {self.degree}")
        object.__setattr__(self, "_poly", poly_from_exponents(self.modulus))
        object.__setattr__(self, "_low", self.modulus[1:])
        object.__setattr__(self, "_mask", (1 << self.degree) - 1)

    # raw-int arithmetic
    def reduce(self, a: int) -> int:
        return _reduce_sparse(a, self.degree, self._low)

    def mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        return self.reduce(poly_mul(a, b))

    def square(self, a: int) -> int:
        return self.reduce(poly_square(a))

    def inv(self, a: int) -> int:
        """Inverse via extended Euclid in GF(2)[x]."""
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(2^d)")
        r0, r1 = self._poly, a
        s0, s1 = 0, 1
        while r1 != 1:
            shift = r0.bit_length() - r1.bit_length()
            if shift < 0:
                r0, r1, s0, s1 = r1, r0, s1, s0
                continue
            r0 ^= r1 << shift
            s0 ^= s1 << shift
            if r0.bit_length() < r1.bit_length():
                r0, r1, s0, s1 = r1, r0, s1, s0
        return self.reduce(s1)

    def pow_alpha(self, e: int | None) -> int:
        """alpha^e with alpha^{-inf} = 0."""
        if e is None:
            return 0
        if e < 0:
            raise ValueError(f"exponent must be -inf or non-negative, got {e}")
        if e < self.degree:
            return 1 << e
        return self.pow(0b10, e)

    def pow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.square(base)
        return result

    @cached_property
    def alpha(self) -> "FieldElement":
        return FieldElement(self, self.pow_alpha(1))

    @property
    def hex_width(self) -> int:
        return (self.degree + 3) // 4

    def element(self, value: int) -> "FieldElement":
        if value < 0 or value >> self.degree:
            raise FieldError(f"value {value:#x} does not fit in {self.degree} bits")
        return FieldElement(self, value)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def to_hex(self, a: int) -> str:
        return f"0x{a:0{self.hex_width}x}"

    def from_hex(self, s: str) -> int:
        if not s.startswith("0x"):
            raise FieldError(f"element must be 0x-prefixed hex, got {s!r}")
        v = int(s, 16)
        if v >> self.degree:
            raise FieldError(f"{s} exceeds degree {self.degree}")
        return v

    def random_int(self, rng) -> int:
        """Uniform element; ``rng`` is a numpy Generator or random.Random."""
        nbytes = (self.degree + 7) // 8
        if isinstance(rng, random.Random):
            return rng.getrandbits(self.degree)
        return int.from_bytes(rng.bytes(nbytes), "little") & self._mask

    def modulus_json(self) -> list[int]:
        return list(self.modulus)


@dataclass(frozen=True)
class FieldElement:
    ctx: FieldCtx
    value: int

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ContextMismatch("elements belong to different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.ctx, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.ctx, self.ctx.mul(self.value, other.value))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inverse()

    def __pow__(self, e: int) -> "FieldElement":
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(self.ctx, self.ctx.pow(self.value, e))

    def __bool__(self) -> bool:
        return self.value != 0

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.value))

    @property
    def bits(self) -> set[int]:
        return set(poly_exponents(self.value))

    def hex(self) -> str:
        return self.ctx.to_hex(self.value)

    def __repr__(self) -> str:
        return f"FieldElement({self.hex()}, d={self.ctx.degree})"


# -- public operations -------------------------------------------------------


def field_create(
    d: int,
    modulus: Iterable[int] | None = None,
    seed: int | None = None,
    max_attempts: int = 200_000,
) -> FieldCtx:
    """Build GF(2^d); without a modulus, search deterministically from ``seed``."""
    if d < 1:
        raise DegreeMismatch("degree must be >= 1")
    if modulus is not None:
        exps = list(modulus)
        if len(set(exps)) != len(exps):
            raise FieldError("modulus exponents must be distinct")
        if max(exps) != d:
            raise DegreeMismatch(f"modulus degree {max(exps)} != {d}")
        if not irreducibility_test(exps, d):
            raise ProvidedModulusReducible(f"modulus {sorted(exps, reverse=True)} is reducible")
        return FieldCtx(d, tuple(exps))
    if d == 1:
        return FieldCtx(1, (1, 0))
    if d in (2, 3):
        return FieldCtx(d, (d, 1, 0))
    rng = random.Random(0 if seed is None else seed)
    for cand in _candidate_moduli(d, rng, max_attempts):
        if irreducibility_test(cand, d):
            return FieldCtx(d, cand)
    raise SearchExhausted(f"no irreducible modulus of degree {d} within {max_attempts} attempts")


def gf_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def gf_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def gf_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def gf_pow_exp(ctx: FieldCtx, e: int | None) -> FieldElement:
    return FieldElement(ctx, ctx.pow_alpha(e))
