"""Split octonions as Zorn vector matrices.

An element is (a, v, w, b) with scalars a, b and 3-vectors v, w; the basis
order [a, v1, v2, v3, w1, w2, w3, b] is the serialization contract.  The
norm n(x) = a*b - v.w is multiplicative and the algebra is alternative but
not associative.
"""

from __future__ import annotations

DIM = 8


def _dot3(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _cross3(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _add3(u, v):
    return (u[0] + v[0], u[1] + v[1], u[2] + v[2])


def _scale3(c, u):
    return (c * u[0], c * u[1], c * u[2])


class Octonion:
    __slots__ = ("a", "v", "w", "b", "field")

    def __init__(self, a, v, w, b, field):
        self.a = a
        self.v = tuple(v)
        self.w = tuple(w)
        self.b = b
        self.field = field

    @classmethod
    def zero(cls, field):
        z = field.zero
        return cls(z, (z, z, z), (z, z, z), z, field)

    @classmethod
    def one(cls, field):
        z, o = field.zero, field.one
        return cls(o, (z, z, z), (z, z, z), o, field)

    @classmethod
    def scalar(cls, c, field):
        z = field.zero
        return cls(c, (z, z, z), (z, z, z), c, field)

    @classmethod
    def from_coords(cls, coords, field):
        if len(coords) != DIM:
            raise ValueError("octonion needs 8 coordinates")
        return cls(coords[0], coords[1:4], coords[4:7], coords[7], field)

    @classmethod
    def basis(cls, i, field):
        z, o = field.zero, field.one
        coords = [z] * DIM
        coords[i] = o
        return cls.from_coords(coords, field)

    @classmethod
    def random(cls, rng, field):
        return cls.from_coords([rng.scalar(field) for _ in range(DIM)], field)

    @classmethod
    def random_integral(cls, rng, field, bound=2):
        return cls.from_coords(
            [rng.integral_scalar(field, bound) for _ in range(DIM)], field
        )

    def coords(self):
        return (self.a,) + self.v + self.w + (self.b,)

    def __add__(self, other):
        return Octonion(
            self.a + other.a,
            _add3(self.v, other.v),
            _add3(self.w, other.w),
            self.b + other.b,
            self.field,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        z = self.field.zero
        return Octonion(
            z - self.a, _scale3(-self.field.one, self.v),
            _scale3(-self.field.one, self.w), z - self.b, self.field,
        )

    def scale(self, c):
        return Octonion(c * self.a, _scale3(c, self.v), _scale3(c, self.w), c * self.b, self.field)

    def __mul__(self, other):
        # Zorn multiplication; the sign convention here is frozen so that
        # serialized coordinates are portable.
        a1, v1, w1, b1 = self.a, self.v, self.w, self.b
        a2, v2, w2, b2 = other.a, other.v, other.w, other.b
        a = a1 * a2 + _dot3(v1, w2)
        v = _add3(_add3(_scale3(a1, v2), _scale3(b2, v1)),
                  _scale3(-self.field.one, _cross3(w1, w2)))
        w = _add3(_add3(_scale3(a2, w1), _scale3(b1, w2)), _cross3(v1, v2))
        b = b1 * b2 + _dot3(w1, v2)
        return Octonion(a, v, w, b, self.field)

    def conj(self):
        m = -self.field.one
        return Octonion(self.b, _scale3(m, self.v), _scale3(m, self.w), self.a, self.field)

    def norm(self):
        return self.a * self.b - _dot3(self.v, self.w)

    def trace(self):
        return self.a + self.b

    def norm_bil(self, other):
        return (self + other).norm() - self.norm() - other.norm()

    def __eq__(self, other):
        return (
            isinstance(other, Octonion)
            and self.a == other.a
            and self.v == other.v
            and self.w == other.w
            and self.b == other.b
        )

    def __hash__(self):
        return hash(self.coords())

    def is_zero(self):
        z = self.field.zero
        return all(c == z for c in self.coords())

    def __repr__(self):
        return "Octonion%r" % (self.coords(),)


def omul(x: Octonion, y: Octonion) -> Octonion:
    return x * y


def oconj(x: Octonion) -> Octonion:
    return x.conj()


def onorm(x: Octonion):
    return x.norm()


def otrace(x: Octonion):
    return x.trace()


def onormbil(x: Octonion, y: Octonion):
    return x.norm_bil(y)
