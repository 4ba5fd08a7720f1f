"""Exact rational dense linear algebra and canonical subspace arithmetic.

Every algebraic decision in this package (rank, membership, containment,
fixpoint termination) is made here over ``fractions.Fraction``, so there is
no rounding anywhere.  Subspaces are stored as reduced row-echelon bases,
which makes them canonical: two subspaces are equal iff their basis matrices
are entrywise equal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Q = Fraction
Q0 = Fraction(0)
Q1 = Fraction(1)

Vec = tuple[Fraction, ...]


def frac(x) -> Fraction:
    """Coerce ints, 'p/q' strings and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def vec(entries: Iterable) -> Vec:
    return tuple(frac(x) for x in entries)


def zero_vec(n: int) -> Vec:
    return (Q0,) * n


def unit_vec(n: int, i: int) -> Vec:
    return tuple(Q1 if j == i else Q0 for j in range(n))


def add_vec(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def sub_vec(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def scale_vec(c: Fraction, a: Sequence[Fraction]) -> Vec:
    return tuple(c * x for x in a)


class Mat:
    """Immutable dense matrix over the rationals, stored row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Sequence[Fraction]):
        if rows < 0 or cols < 0 or len(data) != rows * cols:
            raise ValueError("matrix shape does not match data length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", tuple(data))

    def __setattr__(self, *a):  # pragma: no cover - guard only
        raise AttributeError("Mat is immutable")

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "Mat":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        data = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            data.extend(frac(x) for x in r)
        return Mat(nrows, ncols, data)

    @staticmethod
    def zeros(rows: int, cols: int) -> "Mat":
        return Mat(rows, cols, (Q0,) * (rows * cols))

    @staticmethod
    def identity(n: int) -> "Mat":
        data = [Q0] * (n * n)
        for i in range(n):
            data[i * n + i] = Q1
        return Mat(n, n, data)

    @staticmethod
    def column(v: Sequence) -> "Mat":
        v = vec(v)
        return Mat(len(v), 1, v)

    def at(self, i: int, j: int) -> Fraction:
        return self.data[i * self.cols + j]

    def row(self, i: int) -> Vec:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int) -> Vec:
        return tuple(self.data[i * self.cols + j] for i in range(self.rows))

    def to_lists(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Mat":
        data = [Q0] * (self.rows * self.cols)
        for i in range(self.rows):
            base = i * self.cols
            for j in range(self.cols):
                data[j * self.rows + i] = self.data[base + j]
        return Mat(self.cols, self.rows, data)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.data)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Mat)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __add__(self, other: "Mat") -> "Mat":
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch in addition")
        return Mat(self.rows, self.cols, [x + y for x, y in zip(self.data, other.data)])

    def __sub__(self, other: "Mat") -> "Mat":
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch in subtraction")
        return Mat(self.rows, self.cols, [x - y for x, y in zip(self.data, other.data)])

    def __neg__(self) -> "Mat":
        return Mat(self.rows, self.cols, [-x for x in self.data])

    def __mul__(self, other):
        if isinstance(other, Mat):
            if self.cols != other.rows:
                raise ValueError("shape mismatch in product")
            out = [Q0] * (self.rows * other.cols)
            oc = other.cols
            for i in range(self.rows):
                abase = i * self.cols
                obase = i * oc
                for k in range(self.cols):
                    aik = self.data[abase + k]
                    if aik:
                        bbase = k * oc
                        for j in range(oc):
                            bkj = other.data[bbase + j]
                            if bkj:
                                out[obase + j] += aik * bkj
            return Mat(self.rows, oc, out)
        c = frac(other)
        return Mat(self.rows, self.cols, [c * x for x in self.data])

    def __rmul__(self, other):
        return self.__mul__(other)

    def apply(self, v: Sequence[Fraction]) -> Vec:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise ValueError("vector length does not match column count")
        out = [Q0] * self.rows
        for i in range(self.rows):
            base = i * self.cols
            acc = Q0
            for j, vj in enumerate(v):
                if vj:
                    acc += self.data[base + j] * vj
            out[i] = acc
        return tuple(out)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        body = "; ".join(
            " ".join(str(x) for x in self.row(i)) for i in range(self.rows)
        )
        return f"Mat({self.rows}x{self.cols}: {body})"

    @staticmethod
    def hstack(*mats: "Mat") -> "Mat":
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("row count mismatch in hstack")
        data = []
        for i in range(rows):
            for m in mats:
                data.extend(m.row(i))
        return Mat(rows, sum(m.cols for m in mats), data)

    @staticmethod
    def vstack(*mats: "Mat") -> "Mat":
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("column count mismatch in vstack")
        data = []
        for m in mats:
            data.extend(m.data)
        return Mat(sum(m.rows for m in mats), cols, data)


def commutator(a: Mat, b: Mat) -> Mat:
    return a * b - b * a


def mat_from_vec(v: Sequence[Fraction], rows: int, cols: int) -> Mat:
    return Mat(rows, cols, vec(v))


def vec_from_mat(m: Mat) -> Vec:
    return m.data


def rref(m: Mat) -> tuple[Mat, list[int]]:
    """Unique reduced row-echelon form of m together with the pivot columns."""
    rows = [list(m.row(i)) for i in range(m.rows)]
    nrows, ncols = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        p = rows[r][c]
        if p != 1:
            inv = Q1 / p
            rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                ri, rr = rows[i], rows[r]
                for j in range(c, ncols):
                    if rr[j]:
                        ri[j] -= f * rr[j]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    flat = [x for row in rows for x in row]
    return Mat(nrows, ncols, flat), pivots


class Subspace:
    """Linear subspace with a canonical RREF basis (zero rows dropped)."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, basis: Mat, pivots: Sequence[int]):
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "pivots", tuple(pivots))

    def __setattr__(self, *a):  # pragma: no cover - guard only
        raise AttributeError("Subspace is immutable")

    @staticmethod
    def from_vectors(ambient: int, vectors: Iterable[Sequence]) -> "Subspace":
        vs = [vec(v) for v in vectors]
        for v in vs:
            if len(v) != ambient:
                raise ValueError("vector does not match ambient dimension")
        if not vs:
            return Subspace(ambient, Mat(0, ambient, ()), ())
        red, pivots = rref(Mat.from_rows(vs))
        rows = [red.row(i) for i in range(len(pivots))]
        flat = [x for row in rows for x in row]
        return Subspace(ambient, Mat(len(pivots), ambient, flat), pivots)

    @staticmethod
    def zero(ambient: int) -> "Subspace":
        return Subspace(ambient, Mat(0, ambient, ()), ())

    @staticmethod
    def full(ambient: int) -> "Subspace":
        return Subspace(ambient, Mat.identity(ambient), range(ambient))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def basis_vectors(self) -> list[Vec]:
        return [self.basis.row(i) for i in range(self.dim)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient == other.ambient
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient, self.basis))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Subspace(dim {self.dim} of {self.ambient})"

    def reduce(self, v: Sequence[Fraction]) -> Vec:
        """Remainder of v after eliminating all pivot coordinates."""
        if len(v) != self.ambient:
            raise ValueError("vector does not match ambient dimension")
        out = list(vec(v))
        for r, p in enumerate(self.pivots):
            c = out[p]
            if c:
                row = self.basis.row(r)
                for j in range(p, self.ambient):
                    if row[j]:
                        out[j] -= c * row[j]
        return tuple(out)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def coordinates(self, v: Sequence[Fraction]) -> Vec | None:
        """Coefficients of v in the canonical basis, or None if v is outside."""
        if not self.contains(v):
            return None
        return tuple(vec(v)[p] for p in self.pivots)

    def is_subset(self, other: "Subspace") -> bool:
        if self.ambient != other.ambient:
            raise ValueError("ambient dimension mismatch")
        return all(other.contains(b) for b in self.basis_vectors())

    def __add__(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimension mismatch")
        return Subspace.from_vectors(
            self.ambient, self.basis_vectors() + other.basis_vectors()
        )

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimension mismatch")
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient)
        stacked = Mat.vstack(self.quotient_map(), other.quotient_map())
        return kernel(stacked)

    def quotient_map(self) -> Mat:
        """Matrix of the canonical projection onto the non-pivot coordinates.

        The kernel of the returned map is exactly this subspace; composing
        with section_map() gives the identity on the quotient coordinates.
        """
        non_pivots = self.complement_coords()
        data = []
        for c in non_pivots:
            row = [Q0] * self.ambient
            row[c] = Q1
            for r, p in enumerate(self.pivots):
                row[p] -= self.basis.at(r, c)
            data.extend(row)
        return Mat(len(non_pivots), self.ambient, data)

    def complement_coords(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ambient) if c not in piv]

    def section_map(self) -> Mat:
        """Unit-vector section of quotient_map(): quotient coords -> ambient."""
        non_pivots = self.complement_coords()
        data = [Q0] * (self.ambient * len(non_pivots))
        for j, c in enumerate(non_pivots):
            data[c * len(non_pivots) + j] = Q1
        return Mat(self.ambient, len(non_pivots), data)


def kernel(m: Mat) -> Subspace:
    """Null space {v : m v = 0} with canonical basis."""
    red, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    vectors = []
    for f in free:
        v = [Q0] * m.cols
        v[f] = Q1
        for r, p in enumerate(pivots):
            v[p] = -red.at(r, f)
        vectors.append(v)
    return Subspace.from_vectors(m.cols, vectors)


def solve(a: Mat, b: Sequence[Fraction]) -> tuple[Vec | None, Subspace]:
    """One particular solution of a x = b (or None) plus the homogeneous kernel."""
    b = vec(b)
    if len(b) != a.rows:
        raise ValueError("right-hand side does not match row count")
    aug = Mat.hstack(a, Mat.column(b)) if a.cols else Mat.column(b)
    red, pivots = rref(aug)
    if a.cols in pivots:
        return None, kernel(a)
    x = [Q0] * a.cols
    for r, p in enumerate(pivots):
        x[p] = red.at(r, a.cols)
    return tuple(x), kernel(a)


def inverse(m: Mat) -> Mat:
    """Inverse of a square matrix; raises ValueError if singular."""
    if m.rows != m.cols:
        raise ValueError("only square matrices can be inverted")
    n = m.rows
    red, pivots = rref(Mat.hstack(m, Mat.identity(n)))
    if list(pivots) != list(range(n)):
        raise ValueError("matrix is singular")
    data = []
    for i in range(n):
        data.extend(red.row(i)[n:])
    return Mat(n, n, data)


def rank(m: Mat) -> int:
    return len(rref(m)[1])


class SpanBuilder:
    """Incrementally grown subspace, kept in reduced row-echelon form.

    Used by the closure loops (subalgebra closure, holonomy closure); add()
    reports whether the vector enlarged the span, which doubles as the
    worklist termination test.
    """

    def __init__(self, ambient: int):
        self.ambient = ambient
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        out = list(v)
        for row, p in zip(self.rows, self.pivots):
            c = out[p]
            if c:
                for j in range(p, self.ambient):
                    if row[j]:
                        out[j] -= c * row[j]
        return out

    def contains(self, v: Sequence[Fraction]) -> bool:
        return all(x == 0 for x in self._reduce(vec(v)))

    def add(self, v: Sequence[Fraction]) -> bool:
        """Insert v; returns True iff the span grew."""
        v = vec(v)
        if len(v) != self.ambient:
            raise ValueError("vector does not match ambient dimension")
        red = self._reduce(v)
        pivot = next((j for j, x in enumerate(red) if x != 0), None)
        if pivot is None:
            return False
        inv = Q1 / red[pivot]
        red = [x * inv for x in red]
        for row in self.rows:
            c = row[pivot]
            if c:
                for j in range(pivot, self.ambient):
                    if red[j]:
                        row[j] -= c * red[j]
        pos = 0
        while pos < len(self.pivots) and self.pivots[pos] < pivot:
            pos += 1
        self.rows.insert(pos, red)
        self.pivots.insert(pos, pivot)
        return True

    def to_subspace(self) -> Subspace:
        flat = [x for row in self.rows for x in row]
        return Subspace(
            self.ambient, Mat(len(self.rows), self.ambient, flat), self.pivots
        )
