"""Admissible arrangements of Schmidt coefficients and standard Young tableaux.

An arrangement places the ordered coefficients of a spectrum into a
d1 x d2 matrix so that entries never increase along rows (left to right)
or columns (top to bottom). Arrangements of distinct coefficients are in
bijection with standard Young tableaux of rectangular shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .schmidt import SchmidtSpectrum

DEFAULT_CAP = 16
RANK_ONE_TOL = 1e-9


class CapExceeded(ValueError):
    """Raised when an enumeration would exceed the configured cell cap."""


@dataclass(frozen=True)
class YoungTableau:
    """Standard filling of a Young diagram with 1..n.

    ``rows`` may be ragged (row lengths nonincreasing); rectangular tableaux
    have ``shape == (d1, d2)``.
    """

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        lengths = [len(r) for r in rows]
        if any(a < b for a, b in zip(lengths, lengths[1:])) or 0 in lengths:
            raise ValueError(f"row lengths {lengths} are not a partition")
        n = sum(lengths)
        if sorted(x for r in rows for x in r) != list(range(1, n + 1)):
            raise ValueError("filling must contain 1..n exactly once")
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                if j and r[j - 1] >= x:
                    raise ValueError("filling is not increasing along a row")
                if i and rows[i - 1][j] >= x:
                    raise ValueError("filling is not increasing down a column")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> tuple[int, ...]:
        lengths = tuple(len(r) for r in self.rows)
        if len(set(lengths)) == 1:
            return (len(lengths), lengths[0])
        return lengths

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.rows)

    def hooks(self) -> list[list[int]]:
        lengths = [len(r) for r in self.rows]
        return [
            [lengths[i] - j + sum(1 for k in range(i + 1, len(lengths)) if lengths[k] > j)
             for j in range(lengths[i])]
            for i in range(len(lengths))
        ]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


class ArrangementMatrix:
    """Real d1 x d2 matrix of Schmidt coefficients."""

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2:
            raise ValueError("arrangement must be a matrix")
        v.setflags(write=False)
        self.values = v

    @property
    def shape(self):
        return self.values.shape

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.values, compute_uv=False)

    def top_singular_value(self) -> float:
        return float(self.singular_values()[0])

    def det(self) -> float:
        if self.shape != (2, 2):
            raise ValueError("determinant only used for 2x2 arrangements")
        (a, b), (c, d) = self.values
        return float(a * d - b * c)

    def is_monotone(self) -> bool:
        v = self.values
        return bool((np.diff(v, axis=0) <= 0).all() and (np.diff(v, axis=1) <= 0).all())

    def is_rank_one(self, tol: float = RANK_ONE_TOL) -> bool:
        sv = self.singular_values()
        return sv.size < 2 or sv[1] < tol

    def key(self, decimals: int = 12) -> bytes:
        return np.round(self.values, decimals).tobytes()

    def tolist(self):
        return self.values.tolist()

    def __repr__(self):
        return f"ArrangementMatrix({self.values.tolist()})"


def hook_count(d1: int, d2: int) -> int:
    """Number of standard Young tableaux of the d1 x d2 rectangle."""
    if d1 < 1 or d2 < 1:
        raise ValueError("shape dimensions must be positive")
    hooks = math.prod(i + j - 1 for i in range(1, d1 + 1) for j in range(1, d2 + 1))
    return math.factorial(d1 * d2) // hooks


def boundary_count(d1: int, d2: int) -> int:
    """Interleavings of the first row and first column: (d1+d2-2)! / ((d1-1)! (d2-1)!)."""
    if d1 < 1 or d2 < 1:
        raise ValueError("shape dimensions must be positive")
    return math.comb(d1 + d2 - 2, d1 - 1)


def syt_of_shape(shape: Sequence[int]) -> Iterator[YoungTableau]:
    """Standard Young tableaux of a partition shape.

    Numbers are placed 1, 2, ... and each goes into the lowest-index row
    that can take it first, so the stream is ordered lexicographically by
    the row word (row of 1, row of 2, ...).
    """
    shape = tuple(int(x) for x in shape)
    n = sum(shape)
    rows: list[list[int]] = [[] for _ in shape]

    def rec(k):
        if k > n:
            yield YoungTableau(tuple(tuple(r) for r in rows))
            return
        for i, length in enumerate(shape):
            if len(rows[i]) < length and (i == 0 or len(rows[i - 1]) > len(rows[i])):
                rows[i].append(k)
                yield from rec(k + 1)
                rows[i].pop()

    if n:
        yield from rec(1)


def enumerate_syt(d1: int, d2: int, cap: int = DEFAULT_CAP) -> Iterator[YoungTableau]:
    """Stream all standard Young tableaux of the d1 x d2 rectangle."""
    if d1 * d2 > cap:
        raise CapExceeded(f"{d1}x{d2} has {d1 * d2} cells, above the cap of {cap}")
    return syt_of_shape((d2,) * d1)


def partitions_in_box(n: int, d1: int, d2: int) -> Iterator[tuple[int, ...]]:
    """Partitions of ``n`` with at most ``d1`` parts, each at most ``d2``."""

    def rec(rem, maxpart, parts_left):
        if rem == 0:
            yield ()
            return
        if parts_left == 0:
            return
        for p in range(min(rem, maxpart), 0, -1):
            if p * parts_left < rem:
                break
            for rest in rec(rem - p, p, parts_left - 1):
                yield (p,) + rest

    yield from rec(n, d2, d1)


def arrangement_from_tableau(spectrum: SchmidtSpectrum, t: YoungTableau, shape=None) -> ArrangementMatrix:
    """Cell holding number k receives coefficient s_{k-1}.

    For a ragged tableau, ``shape`` gives the enclosing rectangle and the
    cells outside the diagram receive the remaining (smallest)
    coefficients, which must all be zero.
    """
    c = spectrum.coeffs
    if shape is None:
        shape = t.shape
        if len(shape) != 2 or shape[0] * shape[1] != t.n:
            raise ValueError("ragged tableau needs an enclosing shape")
    d1, d2 = shape
    if c.size != d1 * d2:
        raise ValueError(f"spectrum has {c.size} coefficients, shape {d1}x{d2} needs {d1 * d2}")
    if t.n < c.size and c[t.n:].any():
        raise ValueError("cells outside the tableau would receive nonzero coefficients")
    m = np.zeros((d1, d2))
    for i, r in enumerate(t.rows):
        for j, k in enumerate(r):
            m[i, j] = c[k - 1]
    return ArrangementMatrix(m)


def arrangements(spectrum: SchmidtSpectrum, d1: int, d2: int, cap: int = DEFAULT_CAP,
                 dedupe: bool = False, tol: float = 1e-15) -> Iterator[ArrangementMatrix]:
    """All admissible arrangements of ``spectrum`` in a d1 x d2 matrix.

    Trailing zero coefficients always sit in the cells outside a Young
    diagram holding the nonzero ones, so only the nonzero block is
    enumerated; ``cap`` bounds the number of nonzero coefficients.
    """
    c = spectrum.coeffs
    if c.size != d1 * d2:
        raise ValueError(f"spectrum has {c.size} coefficients, shape {d1}x{d2} needs {d1 * d2}")
    nnz = int((c > tol).sum())
    if nnz > cap:
        raise CapExceeded(f"{nnz} nonzero coefficients exceed the cap of {cap}")
    if nnz == d1 * d2:
        shapes = [(d2,) * d1]
    else:
        shapes = list(partitions_in_box(nnz, d1, d2))
    seen = set()
    for lam in shapes:
        for t in syt_of_shape(lam):
            a = arrangement_from_tableau(spectrum, t, shape=(d1, d2))
            if dedupe:
                k = a.key()
                if k in seen:
                    continue
                seen.add(k)
            yield a


def rank_one_search(spectrum: SchmidtSpectrum, d1: int, d2: int, tol: float = RANK_ONE_TOL,
                    stats: dict | None = None) -> ArrangementMatrix | None:
    """Find a rank-1 admissible arrangement, or return None.

    A rank-1 arrangement is fixed by its first row and first column, the
    interior being ``S[i, j] = S[i, 0] S[0, j] / S[0, 0]``. Coefficients are
    consumed largest first; each one either matches the largest still
    unmatched interior product, or extends the first row or the first
    column (the only branching). Interior products waiting for a match are
    kept in a max-heap and compared within ``tol``.

    If ``stats`` is given, ``stats["branches"]`` receives the number of
    explored first-row/first-column interleavings (dead ends included).
    """
    c = spectrum.coeffs
    n = d1 * d2
    if c.size != n:
        raise ValueError(f"spectrum has {c.size} coefficients, shape {d1}x{d2} needs {n}")
    counter = {"branches": 0}
    if stats is not None:
        stats["branches"] = 0
    if d1 == 1 or d2 == 1:
        counter["branches"] = 1
        if stats is not None:
            stats.update(counter)
        return ArrangementMatrix(c.reshape(d1, d2))

    s0 = c[0]
    row = [s0]
    col = [s0]
    pending: list[float] = []  # negated interior products

    def leaf():
        counter["branches"] += 1

    def dfs(idx):
        if idx == n:
            leaf()
            if pending or len(row) != d2 or len(col) != d1:
                return None
            m = np.outer(col, row) / s0
            a = ArrangementMatrix(m)
            if a.is_rank_one(tol) and np.allclose(np.sort(m.ravel())[::-1], c, atol=tol, rtol=0):
                return a
            return None
        x = c[idx]
        if pending:
            top = -pending[0]
            if top > x + tol:
                leaf()
                return None
            if abs(top - x) <= tol:
                heapq.heappop(pending)
                found = dfs(idx + 1)
                heapq.heappush(pending, -top)
                return found
        options = []
        if len(row) < d2:
            options.append((row, col))
        if len(col) < d1:
            options.append((col, row))
        if not options:
            leaf()
            return None
        for line, other in options:
            products = [x * o / s0 for o in other[1:]]
            line.append(x)
            for p in products:
                heapq.heappush(pending, -p)
            found = dfs(idx + 1)
            for p in products:
                pending.remove(-p)
            heapq.heapify(pending)
            line.pop()
            if found is not None:
                return found
        return None

    if s0 <= 0:
        leaf()
        result = None
    else:
        result = dfs(1)
    if stats is not None:
        stats.update(counter)
    return result
