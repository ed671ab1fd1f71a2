"""Exact scalar arithmetic: arbitrary-precision rationals and prime fields.

Every value in the library is either a ``fractions.Fraction`` (rational mode)
or an ``Fp`` residue (prime mode, p >= 5 so that 6 is invertible).  Both kinds
support the usual arithmetic operators, so the algebra layers above are
written once, generically.
"""

from __future__ import annotations

from fractions import Fraction
import random


class ScalarModeError(TypeError):
    """Raised when values from different scalar modes are mixed."""


def _is_probable_prime(n: int) -> bool:
    # deterministic Miller-Rabin for n < 3.3 * 10^24
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Fp:
    """An element of the prime field F_p, stored canonically in [0, p)."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.v = v % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ScalarModeError("mixed moduli %d and %d" % (self.p, other.p))
            return other
        if isinstance(other, int):
            return Fp(other, self.p)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp(self.v + o.v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp(self.v - o.v, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp(o.v - self.v, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp(self.v * o.v, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.v == 0:
            raise ZeroDivisionError("division by zero in F_%d" % self.p)
        return Fp(self.v * pow(o.v, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return Fp(-self.v, self.p)

    def __pow__(self, n: int):
        if n < 0:
            return Fp(1, self.p) / self ** (-n)
        return Fp(pow(self.v, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.v == other % self.p
        if isinstance(other, Fp):
            return self.p == other.p and self.v == other.v
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return "%d (mod %d)" % (self.v, self.p)


class RationalField:
    """The field of arbitrary-precision rationals."""

    name = "rational"
    is_rational = True
    p = None

    def __init__(self):
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def of(self, n, d=1):
        return Fraction(n, d)

    def random(self, rng: "Rng"):
        return rng.fraction()

    def format(self, x) -> str:
        x = Fraction(x)
        if x.denominator == 1:
            return str(x.numerator)
        return "%d/%d" % (x.numerator, x.denominator)

    def parse(self, s: str):
        if "/" in s:
            n, d = s.split("/")
            return Fraction(int(n), int(d))
        return Fraction(int(s))

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """The field F_p for an odd prime p >= 5 (so 2 and 3 are invertible)."""

    is_rational = False

    def __init__(self, p: int):
        if not isinstance(p, int) or not _is_probable_prime(p):
            raise ValueError("modulus %r is not prime" % (p,))
        if p in (2, 3):
            raise ValueError("p must not be 2 or 3 (6 must be invertible)")
        self.p = p
        self.name = "prime:%d" % p
        self.zero = Fp(0, p)
        self.one = Fp(1, p)

    def of(self, n, d=1):
        return Fp(n, self.p) / Fp(d, self.p)

    def random(self, rng: "Rng"):
        return Fp(rng.integer(0, self.p - 1), self.p)

    def format(self, x) -> str:
        return str(x.v)

    def parse(self, s: str):
        return Fp(int(s), self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("prime", self.p))

    def __repr__(self):
        return "GF(%d)" % self.p


QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


class Rng:
    """Seeded random source.  Identical seeds reproduce identical streams.

    Random rationals keep numerators in [-9, 9] and denominators in [1, 9]
    to limit coefficient swell in exact identity testing.
    """

    def __init__(self, seed: int, label: str = ""):
        self.seed = seed
        self.label = label
        self._r = random.Random("%d/%s" % (seed, label))

    def spawn(self, label: str) -> "Rng":
        return Rng(self.seed, self.label + "/" + label)

    def integer(self, lo: int, hi: int) -> int:
        return self._r.randint(lo, hi)

    def fraction(self) -> Fraction:
        return Fraction(self._r.randint(-9, 9), self._r.randint(1, 9))

    def small_int(self, bound: int = 2) -> Fraction:
        return Fraction(self._r.randint(-bound, bound))

    def scalar(self, field):
        return field.random(self)

    def integral_scalar(self, field, bound: int = 2):
        """A small integer image in the field; integral in both modes."""
        return field.of(self._r.randint(-bound, bound))

    def choice(self, seq):
        return self._r.choice(seq)

    def shuffle(self, seq):
        self._r.shuffle(seq)
