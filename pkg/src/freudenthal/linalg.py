"""Dense exact linear algebra over a scalar field.

Small and medium problems (27x27, 56x56) run through the generic Gaussian
elimination here; the large modular rank certificates use the vectorized
engine in :mod:`freudenthal.kernel`.
"""

from __future__ import annotations

from .scalars import ScalarModeError


class SingularMatrixError(ValueError):
    """The matrix is singular; upstream this doubles as the signal that an
    element is not conjugate invertible."""


class Mat:
    """Immutable dense matrix with exact scalar entries."""

    __slots__ = ("rows", "nrows", "ncols", "field")

    def __init__(self, rows, field):
        self.rows = tuple(tuple(r) for r in rows)
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")
        self.field = field

    @classmethod
    def identity(cls, n, field):
        z, o = field.zero, field.one
        return cls([[o if i == j else z for j in range(n)] for i in range(n)], field)

    @classmethod
    def zero(cls, nrows, ncols, field):
        z = field.zero
        return cls([[z] * ncols for _ in range(nrows)], field)

    @classmethod
    def diagonal(cls, entries, field):
        n = len(entries)
        z = field.zero
        return cls([[entries[i] if i == j else z for j in range(n)] for i in range(n)], field)

    @classmethod
    def from_columns(cls, cols, field):
        return cls(list(zip(*cols)), field)

    def column(self, j):
        return tuple(r[j] for r in self.rows)

    def transpose(self):
        return Mat(zip(*self.rows), self.field)

    def scale(self, c):
        return Mat([[c * x for x in r] for r in self.rows], self.field)

    def __add__(self, other):
        return Mat(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            self.field,
        )

    def __sub__(self, other):
        return Mat(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            self.field,
        )

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.rows))
        return Mat(
            [[_dot(r, c, self.field) for c in cols] for r in self.rows], self.field
        )

    def matvec(self, v):
        if len(v) != self.ncols:
            raise ValueError("shape mismatch")
        return tuple(_dot(r, v, self.field) for r in self.rows)

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and all(a == b for r1, r2 in zip(self.rows, other.rows) for a, b in zip(r1, r2))
        )

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self):
        z = self.field.zero
        return all(x == z for r in self.rows for x in r)

    def __repr__(self):
        return "Mat(%dx%d over %r)" % (self.nrows, self.ncols, self.field)


def _dot(r, c, field):
    acc = field.zero
    for a, b in zip(r, c):
        acc = acc + a * b
    return acc


def _check_mode(rows, field):
    # mixing Fraction and Fp entries is a caller bug; catch it early
    probe = None
    for r in rows:
        for x in r:
            probe = x
            break
        if probe is not None:
            break
    if probe is None:
        return
    rational = not hasattr(probe, "p")
    for r in rows:
        for x in r:
            if (not hasattr(x, "p")) != rational:
                raise ScalarModeError("mixed scalar modes in matrix")


class _Echelon:
    """Reduced row echelon accumulator; rows are streamed in."""

    def __init__(self, ncols, field):
        self.ncols = ncols
        self.field = field
        self.pivots = []  # parallel lists: pivot column -> reduced row
        self.rows = []

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, row):
        row = list(row)
        z = self.field.zero
        for pc, prow in zip(self.pivots, self.rows):
            c = row[pc]
            if c != z:
                for j in range(self.ncols):
                    row[j] = row[j] - c * prow[j]
        return row

    def add_row(self, row) -> bool:
        """Returns True when the row increased the rank."""
        row = self.reduce(row)
        z = self.field.zero
        pc = next((j for j, x in enumerate(row) if x != z), None)
        if pc is None:
            return False
        inv = self.field.one / row[pc]
        row = [inv * x for x in row]
        for other in self.rows:
            c = other[pc]
            if c != z:
                for j in range(self.ncols):
                    other[j] = other[j] - c * row[j]
        self.pivots.append(pc)
        self.rows.append(row)
        order = sorted(range(len(self.pivots)), key=self.pivots.__getitem__)
        self.pivots = [self.pivots[i] for i in order]
        self.rows = [self.rows[i] for i in order]
        return True

    def nullspace_basis(self):
        z, o = self.field.zero, self.field.one
        pivot_set = set(self.pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = [z] * self.ncols
            v[free] = o
            for pc, row in zip(self.pivots, self.rows):
                v[pc] = -row[free]
            basis.append(tuple(v))
        return basis


def nullspace(m, mode="exhaustive", window=None, verify_rows=None, rng=None):
    """Rank and nullspace basis of ``m``.

    ``exhaustive`` processes every row.  ``incremental`` stops once the rank
    has been stable across a window of 3 * ncols consecutive rows (or a
    caller-supplied ``window``) and then verifies the basis against
    10 * ncols random combinations of the full row set.
    """
    if mode not in ("exhaustive", "incremental"):
        raise ValueError("unknown mode %r" % mode)
    _check_mode(m.rows, m.field)
    ech = _Echelon(m.ncols, m.field)
    if mode == "exhaustive":
        for row in m.rows:
            ech.add_row(row)
    else:
        if window is None:
            window = 3 * m.ncols
        stable = 0
        for row in m.rows:
            if ech.add_row(row):
                stable = 0
            else:
                stable += 1
                if stable >= window or ech.rank == m.ncols:
                    break
        basis = ech.nullspace_basis()
        n_verify = verify_rows if verify_rows is not None else 10 * m.ncols
        if rng is not None and m.nrows and basis:
            z = m.field.zero
            for _ in range(n_verify):
                k = min(m.nrows, 8)
                combo = [z] * m.ncols
                for _ in range(k):
                    i = rng.integer(0, m.nrows - 1)
                    c = m.field.of(rng.integer(-3, 3))
                    row = m.rows[i]
                    combo = [a + c * b for a, b in zip(combo, row)]
                for v in basis:
                    if _dot(combo, v, m.field) != z:
                        raise AssertionError("incremental nullspace basis failed verification")
        return ech.rank, basis
    return ech.rank, ech.nullspace_basis()


def rank(m) -> int:
    return nullspace(m)[0]


def solve(m: Mat, rhs):
    """Solve m x = rhs exactly; raises SingularMatrixError if inconsistent
    or the square system is singular."""
    _check_mode(m.rows, m.field)
    z = m.field.zero
    aug_rows = [list(r) + [b] for r, b in zip(m.rows, rhs)]
    ech = _Echelon(m.ncols + 1, m.field)
    for row in aug_rows:
        ech.add_row(row)
    x = [z] * m.ncols
    for pc, row in zip(ech.pivots, ech.rows):
        if pc == m.ncols:
            raise SingularMatrixError("inconsistent system")
    if len([pc for pc in ech.pivots if pc < m.ncols]) < m.ncols:
        raise SingularMatrixError("singular or underdetermined system")
    for pc, row in zip(ech.pivots, ech.rows):
        x[pc] = row[m.ncols]
    return tuple(x)


def invert(m: Mat) -> Mat:
    if m.nrows != m.ncols:
        raise ValueError("only square matrices can be inverted")
    _check_mode(m.rows, m.field)
    n = m.ncols
    field = m.field
    z, o = field.zero, field.one
    a = [list(r) + [o if i == j else z for j in range(n)] for i, r in enumerate(m.rows)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != z), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = o / a[col][col]
        a[col] = [inv * x for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != z:
                c = a[i][col]
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    return Mat([r[n:] for r in a], field)
