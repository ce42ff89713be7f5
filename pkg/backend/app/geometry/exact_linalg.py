"""
Exact rational and integer linear algebra.

Scalars are `fractions.Fraction` (always in lowest terms) or Python ints, so
no operation here ever rounds. The cost is that entry sizes grow with the
work done; at the dimensions orbispec handles (d <= 12) this is negligible.
Every matrix is immutable and hashable, so values can be shared freely
between worker threads.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import NotPositiveDefinite, SingularMatrix, ValidationError


Scalar = Union[int, Fraction]
Vector = Tuple[Scalar, ...]


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction or "p/q" string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"Expected a rational number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"Invalid rational '{value}': {e}")
    raise ValidationError(f"Expected int or 'p/q' string, got {type(value).__name__}")


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    return sum((a * b for a, b in zip(u, v)), 0)


class _Matrix:
    """Immutable dense matrix; subclasses fix the scalar ring."""

    __slots__ = ("_rows", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(self._coerce(x) for x in row) for row in rows)
        if not data or not data[0]:
            raise ValidationError("Matrix must have at least one row and one column")
        if any(len(r) != len(data[0]) for r in data):
            raise ValidationError("Every matrix row must have the same number of entries")
        self._rows = data
        self._hash = None

    @staticmethod
    def _coerce(x):
        raise NotImplementedError

    @classmethod
    def identity(cls, n: int):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def diagonal(cls, entries: Sequence[Scalar]):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self._rows), len(self._rows[0])

    @property
    def is_square(self) -> bool:
        return self.shape[0] == self.shape[1]

    @property
    def rows(self) -> Tuple[Tuple[Scalar, ...], ...]:
        return self._rows

    @property
    def cols(self) -> Tuple[Tuple[Scalar, ...], ...]:
        return tuple(zip(*self._rows))

    @property
    def T(self):
        return type(self)(self.cols)

    @property
    def trace(self) -> Scalar:
        return sum(self._rows[i][i] for i in range(min(self.shape)))

    @property
    def is_symmetric(self) -> bool:
        return self._rows == tuple(zip(*self._rows))

    def __getitem__(self, index):
        if isinstance(index, tuple):
            i, j = index
            return self._rows[i][j]
        return self._rows[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, _Matrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._rows)
        return f"{type(self).__name__}[{body}]"

    def _result_type(self, other):
        return type(self) if type(self) is type(other) else QMatrix

    def __add__(self, other):
        if not isinstance(other, _Matrix) or other.shape != self.shape:
            return NotImplemented
        return self._result_type(other)(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)]
        )

    def __sub__(self, other):
        if not isinstance(other, _Matrix) or other.shape != self.shape:
            return NotImplemented
        return self._result_type(other)(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)]
        )

    def __neg__(self):
        return type(self)([[-a for a in r] for r in self._rows])

    def __matmul__(self, other):
        if isinstance(other, _Matrix):
            if self.shape[1] != other.shape[0]:
                raise ValidationError(f"Inner shapes do not match: {self.shape} @ {other.shape}")
            other_cols = other.cols
            return self._result_type(other)([[dot(r, c) for c in other_cols] for r in self._rows])
        if isinstance(other, (tuple, list)):
            if len(other) != self.shape[1]:
                raise ValidationError("Vector length must equal the number of columns")
            return tuple(dot(r, other) for r in self._rows)
        return NotImplemented

    def scale(self, scalar: Scalar) -> "QMatrix":
        return QMatrix([[a * scalar for a in r] for r in self._rows])

    def power(self, n: int):
        if n < 0:
            raise ValidationError("Only non-negative matrix powers are supported")
        result = type(self).identity(self.shape[0])
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "QMatrix":
        return QMatrix([[self._rows[i][j] for j in cols] for i in rows])

    def tolist(self) -> List[List[Scalar]]:
        return [list(r) for r in self._rows]

    def det(self) -> Fraction:
        """Determinant by fraction-exact Gaussian elimination."""
        if not self.is_square:
            raise ValidationError("Determinant requires a square matrix")
        a = [[Fraction(x) for x in r] for r in self._rows]
        n = len(a)
        det = Fraction(1)
        for c in range(n):
            pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != c:
                a[c], a[pivot] = a[pivot], a[c]
                det = -det
            det *= a[c][c]
            for r in range(c + 1, n):
                if a[r][c] != 0:
                    f = a[r][c] / a[c][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return det

    def rank(self) -> int:
        """Rank over the rationals."""
        a = [[Fraction(x) for x in r] for r in self._rows]
        rows, cols = self.shape
        rank = 0
        for c in range(cols):
            pivot = next((r for r in range(rank, rows) if a[r][c] != 0), None)
            if pivot is None:
                continue
            a[rank], a[pivot] = a[pivot], a[rank]
            for r in range(rows):
                if r != rank and a[r][c] != 0:
                    f = a[r][c] / a[rank][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
            rank += 1
            if rank == rows:
                break
        return rank


class QMatrix(_Matrix):
    """Rational matrix."""

    __slots__ = ()

    @staticmethod
    def _coerce(x) -> Fraction:
        return to_fraction(x)


class ZMatrix(_Matrix):
    """Integer matrix; point-group elements live here in lattice coordinates."""

    __slots__ = ()

    @staticmethod
    def _coerce(x) -> int:
        if isinstance(x, bool):
            raise ValidationError(f"Expected an integer matrix entry, got {x!r}")
        if isinstance(x, int):
            return x
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        raise ValidationError(f"Expected an integer matrix entry, got {x!r}")

    def det(self) -> int:
        return int(super().det())

    def to_q(self) -> QMatrix:
        return QMatrix(self._rows)


@dataclass(frozen=True)
class SNFDecomposition:
    """
    Smith normal form m = U · D · V.

    U and V are unimodular; U_inv and V_inv are their exact inverses, kept
    because solving congruences needs them and tracking both sides is free.
    `diagonal` has min(rows, cols) entries, d1 | d2 | ..., zeros last.
    """
    U: ZMatrix
    diagonal: Tuple[int, ...]
    V: ZMatrix
    U_inv: ZMatrix
    V_inv: ZMatrix

    @property
    def D(self) -> ZMatrix:
        rows, cols = self.U.shape[0], self.V.shape[0]
        return ZMatrix(
            [[self.diagonal[i] if i == j else 0 for j in range(cols)] for i in range(rows)]
        )

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x != 0)


def snf(m: ZMatrix) -> SNFDecomposition:
    """
    Smith normal form with unimodular transforms.

    Works on any rectangular integer matrix. The pivot at each step is the
    smallest nonzero entry (by absolute value) of the remaining block, first
    found in a row-major scan, so the output is deterministic.

    Args:
        m: Integer matrix

    Returns:
        SNFDecomposition with U · D · V == m
    """
    rows, cols = m.shape
    a = [list(r) for r in m.rows]
    # m = U a V throughout; P = U^-1 and Q = V^-1 track the inverse side
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    P = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]
    Q = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        P[i], P[j] = P[j], P[i]
        for row in U:
            row[i], row[j] = row[j], row[i]

    def add_row(i: int, j: int, q: int) -> None:
        # row_i += q * row_j
        a[i] = [x + q * y for x, y in zip(a[i], a[j])]
        P[i] = [x + q * y for x, y in zip(P[i], P[j])]
        for row in U:
            row[j] -= q * row[i]

    def negate_row(i: int) -> None:
        a[i] = [-x for x in a[i]]
        P[i] = [-x for x in P[i]]
        for row in U:
            row[i] = -row[i]

    def swap_cols(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in Q:
            row[i], row[j] = row[j], row[i]
        V[i], V[j] = V[j], V[i]

    def add_col(j: int, i: int, q: int) -> None:
        # col_j += q * col_i
        for row in a:
            row[j] += q * row[i]
        for row in Q:
            row[j] += q * row[i]
        V[i] = [x - q * y for x, y in zip(V[i], V[j])]

    def smallest_in_block(s: int):
        best = None
        for i in range(s, rows):
            for j in range(s, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        return best

    for s in range(min(rows, cols)):
        while True:
            pos = smallest_in_block(s)
            if pos is None:
                break
            if pos[0] != s:
                swap_rows(s, pos[0])
            if pos[1] != s:
                swap_cols(s, pos[1])

            pivot = a[s][s]
            clean = True
            for i in range(s + 1, rows):
                q = a[i][s] // pivot
                if q:
                    add_row(i, s, -q)
                clean &= a[i][s] == 0
            for j in range(s + 1, cols):
                q = a[s][j] // pivot
                if q:
                    add_col(j, s, -q)
                clean &= a[s][j] == 0
            if not clean:
                continue

            offender = next(
                (i for i in range(s + 1, rows) for j in range(s + 1, cols) if a[i][j] % pivot != 0),
                None
            )
            if offender is not None:
                add_row(s, offender, 1)
                continue

            if pivot < 0:
                negate_row(s)
            break

        if smallest_in_block(s) is None:
            break

    diagonal = tuple(a[i][i] for i in range(min(rows, cols)))
    return SNFDecomposition(
        U=ZMatrix(U), diagonal=diagonal, V=ZMatrix(V), U_inv=ZMatrix(P), V_inv=ZMatrix(Q)
    )


def char_poly(g: _Matrix) -> List[int]:
    """
    Coefficients of det(xI - g), highest degree first (monic, length d + 1).

    Faddeev-LeVerrier recursion; every division is exact for integer input.
    """
    if not g.is_square:
        raise ValidationError("Characteristic polynomial requires a square matrix")
    n = g.shape[0]
    coeffs = [Fraction(1)]
    M = QMatrix.zeros(n, n)
    A = QMatrix(g.rows)
    identity = QMatrix.identity(n)
    for k in range(1, n + 1):
        M = A @ M + identity.scale(coeffs[-1])
        coeffs.append(-(A @ M).trace / k)
    if all(c.denominator == 1 for c in coeffs):
        return [int(c) for c in coeffs]
    return coeffs


def inverse(m: _Matrix) -> QMatrix:
    """
    Exact inverse by Gauss-Jordan elimination.

    Raises:
        SingularMatrix: if det(m) == 0
    """
    if not m.is_square:
        raise ValidationError("Inverse requires a square matrix")
    n = m.shape[0]
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m.rows)]
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
        if pivot is None:
            raise SingularMatrix("Matrix is singular", context={"matrix": [[str(x) for x in r] for r in m.rows]})
        a[c], a[pivot] = a[pivot], a[c]
        inv_p = 1 / a[c][c]
        a[c] = [x * inv_p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return QMatrix([row[n:] for row in a])


def ldl(m: QMatrix) -> Tuple[QMatrix, Tuple[Fraction, ...]]:
    """
    Rational LDL^T of a symmetric positive definite matrix.

    Returns:
        (L, D) with L unit lower triangular and D the positive diagonal

    Raises:
        NotPositiveDefinite: if a pivot is not positive or m is not symmetric
    """
    if not m.is_square or not m.is_symmetric:
        raise NotPositiveDefinite("Matrix must be square and symmetric")
    n = m.shape[0]
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D: List[Fraction] = []
    for j in range(n):
        dj = m[j, j] - sum(L[j][k] ** 2 * D[k] for k in range(j))
        if dj <= 0:
            raise NotPositiveDefinite(f"Leading minor {j + 1} is not positive")
        D.append(dj)
        for i in range(j + 1, n):
            L[i][j] = (m[i, j] - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / dj
    return QMatrix(L), tuple(D)


def quadratic_form(m: _Matrix, v: Sequence[Scalar]) -> Scalar:
    """v^T m v."""
    return dot(v, m @ tuple(v))


# Integer polynomials, coefficient lists highest degree first.

def poly_divmod(num: Sequence[int], den: Sequence[int]) -> Tuple[List[Fraction], List[Fraction]]:
    """Polynomial long division over Q."""
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    if not den or den[0] == 0:
        raise ValidationError("Polynomial divisor must have a nonzero leading coefficient")
    if len(num) < len(den):
        return [Fraction(0)], num
    quotient = []
    rem = list(num)
    for _ in range(len(num) - len(den) + 1):
        q = rem[0] / den[0]
        quotient.append(q)
        padded = [q * c for c in den] + [Fraction(0)] * (len(rem) - len(den))
        rem = [r - p for r, p in zip(rem, padded)][1:]
    while len(rem) > 1 and rem[0] == 0:
        rem = rem[1:]
    return quotient, rem or [Fraction(0)]


def poly_eval(coeffs: Sequence[Scalar], x: Scalar) -> Scalar:
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def integer_kernel(m: ZMatrix) -> List[Tuple[int, ...]]:
    """
    Z-basis of {x in Z^n : m x = 0}.

    With m = U D V, m x = 0 iff (V x)_i = 0 wherever d_i != 0, so the basis is
    the columns of V^-1 past the rank.
    """
    decomposition = snf(m)
    cols = m.shape[1]
    rank = decomposition.rank
    inv_cols = decomposition.V_inv.cols
    return [tuple(inv_cols[j]) for j in range(rank, cols)]


def exact_sqrt(q: Fraction) -> Optional[Fraction]:
    """sqrt(q) when q is the square of a rational, else None."""
    q = to_fraction(q)
    if q < 0:
        return None
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None
