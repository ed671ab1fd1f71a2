"""The split Albert algebra H3 of split octonions.

An element is a Hermitian 3x3 matrix over the split octonions, stored as
three diagonal scalars and three off-diagonal octonions; the basis order
[alpha1, alpha2, alpha3, c1(8), c2(8), c3(8)] gives 27 coordinates and is
the serialization contract.

The cubic norm N, adjoint #, and bilinear trace T are all derived from the
Jordan product and the linear trace via characteristic-polynomial formulas;
their correctness is pinned by the adjoint identity x## = N(x) x and the
polarization oracles in the test suite.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Mat, SingularMatrixError, invert, solve
from .scalars import QQ
from .zorn import DIM as ODIM, Octonion

DIM = 27


class AlbertElement:
    __slots__ = ("d", "c", "field")

    def __init__(self, d, c, field):
        self.d = tuple(d)   # three diagonal scalars
        self.c = tuple(c)   # three off-diagonal octonions
        self.field = field

    @classmethod
    def zero(cls, field):
        z = field.zero
        zo = Octonion.zero(field)
        return cls((z, z, z), (zo, zo, zo), field)

    @classmethod
    def one(cls, field):
        o = field.one
        zo = Octonion.zero(field)
        return cls((o, o, o), (zo, zo, zo), field)

    @classmethod
    def diagonal(cls, a1, a2, a3, field):
        zo = Octonion.zero(field)
        return cls((a1, a2, a3), (zo, zo, zo), field)

    @classmethod
    def from_coords(cls, coords, field):
        if len(coords) != DIM:
            raise ValueError("Albert element needs 27 coordinates")
        d = tuple(coords[0:3])
        c = tuple(
            Octonion.from_coords(coords[3 + ODIM * i : 3 + ODIM * (i + 1)], field)
            for i in range(3)
        )
        return cls(d, c, field)

    @classmethod
    def basis(cls, i, field):
        coords = [field.zero] * DIM
        coords[i] = field.one
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
        out = list(self.d)
        for oc in self.c:
            out.extend(oc.coords())
        return tuple(out)

    def __add__(self, other):
        return AlbertElement(
            tuple(a + b for a, b in zip(self.d, other.d)),
            tuple(a + b for a, b in zip(self.c, other.c)),
            self.field,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.scale(-self.field.one)

    def scale(self, k):
        return AlbertElement(
            tuple(k * a for a in self.d),
            tuple(oc.scale(k) for oc in self.c),
            self.field,
        )

    def __eq__(self, other):
        return (
            isinstance(other, AlbertElement)
            and self.d == other.d
            and self.c == other.c
        )

    def __hash__(self):
        return hash(self.coords())

    def is_zero(self):
        z = self.field.zero
        return all(x == z for x in self.coords())

    def __repr__(self):
        return "AlbertElement%r" % (self.coords(),)

    # -- Hermitian matrix view -------------------------------------------

    def _matrix(self):
        f = self.field
        a1, a2, a3 = (Octonion.scalar(x, f) for x in self.d)
        c1, c2, c3 = self.c
        return (
            (a1, c3, c2.conj()),
            (c3.conj(), a2, c1),
            (c2, c1.conj(), a3),
        )

    def ltr(self):
        return self.d[0] + self.d[1] + self.d[2]


def _matmul3(x, y):
    return tuple(
        tuple(
            x[i][0] * y[0][j] + x[i][1] * y[1][j] + x[i][2] * y[2][j]
            for j in range(3)
        )
        for i in range(3)
    )


def jmul(x: AlbertElement, y: AlbertElement) -> AlbertElement:
    """Jordan product (xy + yx)/2 of Hermitian octonion matrices."""
    f = x.field
    half = f.one / f.of(2)
    xy = _matmul3(x._matrix(), y._matrix())
    yx = _matmul3(y._matrix(), x._matrix())
    p = tuple(
        tuple((xy[i][j] + yx[i][j]).scale(half) for j in range(3)) for i in range(3)
    )
    d = []
    for i in range(3):
        entry = p[i][i]
        # the diagonal of a symmetrized Hermitian product is scalar
        if entry.a != entry.b or any(v != f.zero for v in entry.v + entry.w):
            raise AssertionError("Jordan product diagonal is not scalar")
        d.append(entry.a)
    c = (p[1][2], p[2][0], p[0][1])
    for i, (lo, hi) in enumerate(((2, 1), (0, 2), (1, 0))):
        if p[lo][hi] != c[i].conj():
            raise AssertionError("Jordan product is not Hermitian")
    return AlbertElement(tuple(d), c, f)


def norm(x: AlbertElement):
    """Cubic norm via the characteristic-polynomial trace formula."""
    f = x.field
    x2 = jmul(x, x)
    x3 = jmul(x2, x)
    t = x.ltr()
    return (t * t * t - f.of(3) * t * x2.ltr() + f.of(2) * x3.ltr()) / f.of(6)


def sharp(x: AlbertElement) -> AlbertElement:
    f = x.field
    x2 = jmul(x, x)
    t = x.ltr()
    sigma = (t * t - x2.ltr()) / f.of(2)
    return x2 - x.scale(t) + AlbertElement.one(f).scale(sigma)


def cross(x: AlbertElement, y: AlbertElement) -> AlbertElement:
    """Linearization of the adjoint: (x+y)# - x# - y#."""
    f = x.field
    xy = jmul(x, y)
    sig = x.ltr() * y.ltr() - xy.ltr()
    return (
        xy.scale(f.of(2))
        - y.scale(x.ltr())
        - x.scale(y.ltr())
        + AlbertElement.one(f).scale(sig)
    )


def ndir(x: AlbertElement, y: AlbertElement):
    """Coefficient of t in N(x + t y), extracted by exact interpolation at
    t in {1, -1, 2} (valid since char is not 2 or 3)."""
    f = x.field
    nx = norm(x)
    g1 = norm(x + y) - nx
    gm1 = norm(x - y) - nx
    g2 = norm(x + y.scale(f.of(2))) - nx
    vand = Mat(
        [
            [f.one, f.one, f.one],
            [-f.one, f.one, -f.one],
            [f.of(2), f.of(4), f.of(8)],
        ],
        f,
    )
    a, _, _ = solve(vand, (g1, gm1, g2))
    return a


def nfull(x: AlbertElement, y: AlbertElement, z: AlbertElement):
    """Full trilinear linearization of the cubic norm."""
    return (
        norm(x + y + z)
        - norm(x + y)
        - norm(x + z)
        - norm(y + z)
        + norm(x)
        + norm(y)
        + norm(z)
    )


def tbil(x: AlbertElement, y: AlbertElement):
    """Bilinear trace T(x, y) = N(1,x) N(1,y) - N(1,x,y)."""
    one = AlbertElement.one(x.field)
    return ndir(one, x) * ndir(one, y) - nfull(one, x, y)


# -- cached trace Gram matrix -------------------------------------------

_GRAM_INT = None


def _gram_int():
    """Integer Gram matrix of the bilinear trace in the fixed basis.

    The entries are the linear traces of basis Jordan products, taken from
    the frozen integer tables and verified against the norm-derived
    definition of T on a sample of basis pairs.
    """
    global _GRAM_INT
    if _GRAM_INT is None:
        from . import kernel

        t27 = kernel.tables()["T27"]
        basis = [AlbertElement.basis(i, QQ) for i in range(DIM)]
        for (i, j) in ((0, 0), (0, 1), (3, 3 + ODIM - 1), (5, 20)):
            if Fraction(int(t27[i, j])) != tbil(basis[i], basis[j]):
                raise AssertionError("trace Gram disagrees with norm-derived T")
        _GRAM_INT = tuple(tuple(int(v) for v in row) for row in t27)
    return _GRAM_INT


_GRAM_CACHE = {}


def gram(field) -> Mat:
    key = field
    if key not in _GRAM_CACHE:
        gi = _gram_int()
        _GRAM_CACHE[key] = Mat(
            [[field.of(v) for v in row] for row in gi], field
        )
    return _GRAM_CACHE[key]


_GRAM_INV_CACHE = {}


def gram_inverse(field) -> Mat:
    if field not in _GRAM_INV_CACHE:
        try:
            _GRAM_INV_CACHE[field] = invert(gram(field))
        except SingularMatrixError:
            raise AssertionError("trace Gram matrix must be invertible")
    return _GRAM_INV_CACHE[field]


def tbil_fast(x: AlbertElement, y: AlbertElement):
    """T(x, y) via the cached Gram matrix (equal to tbil, much cheaper)."""
    g = gram(x.field)
    xc, yc = x.coords(), y.coords()
    acc = x.field.zero
    for i, xi in enumerate(xc):
        if xi == x.field.zero:
            continue
        row = g.rows[i]
        for j, yj in enumerate(yc):
            if yj != y.field.zero:
                acc = acc + xi * row[j] * yj
    return acc


# -- linear maps on the 27-dimensional module ---------------------------


def apply_map(m: Mat, x: AlbertElement) -> AlbertElement:
    return AlbertElement.from_coords(m.matvec(x.coords()), x.field)


def map_from_images(images, field) -> Mat:
    return Mat.from_columns([im.coords() for im in images], field)


def dagger(rho: Mat) -> Mat:
    """The inverse transpose with respect to the bilinear trace:
    satisfies T(rho(x), dagger(rho)(y)) = T(x, y)."""
    f = rho.field
    g = gram(f)
    gi = gram_inverse(f)
    try:
        return invert(gi @ rho.transpose() @ g)
    except SingularMatrixError:
        raise SingularMatrixError("dagger of a singular map")


def u_op(a: AlbertElement) -> Mat:
    """Jordan U-operator U_a(x) = 2 a o (a o x) - (a o a) o x as a 27x27 map."""
    f = a.field
    aa = jmul(a, a)
    two = f.of(2)
    cols = []
    for i in range(DIM):
        e = AlbertElement.basis(i, f)
        img = jmul(a, jmul(a, e)).scale(two) - jmul(aa, e)
        cols.append(img.coords())
    return Mat.from_columns(cols, f)


class Verdict:
    """Result of a membership check; truthy iff accepted."""

    __slots__ = ("ok", "code")

    def __init__(self, ok: bool, code: str):
        self.ok = ok
        self.code = code

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return "Verdict(%s, %r)" % (self.ok, self.code)


def is_isometry(rho: Mat, seed: int = 0) -> Verdict:
    """Accepts iff rho preserves the full trilinear form on every symmetric
    basis triple and the cubic norm on 32 seeded random points."""
    from . import kernel
    from .scalars import Rng

    try:
        invert(rho)
    except SingularMatrixError:
        return Verdict(False, "singular")
    if not kernel.preserves_trilinear_norm(rho):
        return Verdict(False, "trilinear-mismatch")
    rng = Rng(seed, "isom-norm-guard")
    for _ in range(32):
        x = AlbertElement.random_integral(rng, rho.field, bound=2)
        if norm(apply_map(rho, x)) != norm(x):
            return Verdict(False, "norm-mismatch")
    return Verdict(True, "ok")
