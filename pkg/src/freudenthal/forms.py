"""Full polarization of homogeneous forms of degree up to 4.

For f homogeneous of degree d with f(0) = 0,

    polarize(f, x1, ..., xd) = sum over nonempty S of (-1)^(d-|S|) f(sum_S x_i),

which for d = 4 is the coefficient of t1 t2 t3 t4 in f(sum t_i x_i).  On the
diagonal it evaluates to d! * f(x).
"""

from __future__ import annotations

from itertools import combinations


class DegreeError(ValueError):
    pass


def polarize(f, *xs):
    d = len(xs)
    if not 1 <= d <= 4:
        raise DegreeError("polarization supports degrees 1..4, got %d" % d)
    acc = None
    for size in range(1, d + 1):
        sign = (-1) ** (d - size)
        for subset in combinations(xs, size):
            total = subset[0]
            for x in subset[1:]:
                total = total + x
            term = f(total)
            if sign < 0:
                term = -term
            acc = term if acc is None else acc + term
    return acc
