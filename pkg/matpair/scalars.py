"""Scalars and matrices over the reals, the complex numbers and the quaternions.

Quaternions are stored by their complex split q = z1 + z2 j with z1 = a + bi, z2 = c + di.
Quaternion matrices keep the two complex component matrices, which makes products, the
involutions and the complex adjoint embedding plain numpy expressions.
"""

from __future__ import annotations
from enum import Enum
from math import sqrt
from numbers import Number
from typing import NamedTuple, Sequence, Union

import numpy as np

from .util import MatpairError


class ContextError(MatpairError):
    """Illegal combination of field, involution, form symmetry or exponent."""


class Field(Enum):
    C = "C"
    R = "R"
    H = "H"

    @property
    def involutions(self):
        return _legal_involutions[self]


class Involution(Enum):
    identity = "identity"
    conj = "conj"
    quatconj = "quatconj"
    quatsemiconj = "quatsemiconj"

    @property
    def is_quaternion(self):
        return self in (Involution.quatconj, Involution.quatsemiconj)


_legal_involutions = {
    Field.R: (Involution.identity,),
    Field.C: (Involution.identity, Involution.conj),
    Field.H: (Involution.quatconj, Involution.quatsemiconj),
}


def check_context(field: Field, involution: Involution):
    if involution not in field.involutions:
        raise ContextError(f"Involution '{involution.value}' is not defined over {field.value}")


class Quaternion(NamedTuple):
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @staticmethod
    def of(x: Scalar):
        if isinstance(x, Quaternion):
            return x
        z = complex(x)
        return Quaternion(z.real, z.imag, 0.0, 0.0)

    @staticmethod
    def from_split(z1: complex, z2: complex):
        z1, z2 = complex(z1), complex(z2)
        return Quaternion(z1.real, z1.imag, z2.real, z2.imag)

    @property
    def split(self):
        return complex(self.a, self.b), complex(self.c, self.d)

    def __add__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        o = Quaternion.of(other)
        return Quaternion(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __sub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return self + (-Quaternion.of(other))

    def __rsub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return Quaternion.of(other) - self

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        z1, z2 = self.split
        w1, w2 = Quaternion.of(other).split
        return Quaternion.from_split(
            z1 * w1 - z2 * w2.conjugate(), z1 * w2 + z2 * w1.conjugate()
        )

    def __rmul__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return Quaternion.of(other) * self

    def __truediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return self * Quaternion.of(other).inverse()

    def __abs__(self):
        return self.norm

    @property
    def norm(self):
        return sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    def conj(self):
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def semiconj(self):
        return Quaternion(self.a, -self.b, self.c, self.d)

    def inverse(self):
        n2 = self.a**2 + self.b**2 + self.c**2 + self.d**2
        if n2 == 0:
            raise ZeroDivisionError("quaternion inverse of zero")
        q = self.conj()
        return Quaternion(q.a / n2, q.b / n2, q.c / n2, q.d / n2)

    def is_close(self, other: Scalar, tol=1e-12):
        return abs(self - Quaternion.of(other)) <= tol

    @property
    def is_complex(self):
        return self.c == 0 and self.d == 0

    def __str__(self):
        parts = [f"{self.a:g}"]
        for value, unit in ((self.b, "i"), (self.c, "j"), (self.d, "k")):
            parts.append(f"{'-' if value < 0 else '+'}{abs(value):g}{unit}")
        return "".join(parts)


Scalar = Union[float, complex, Quaternion]


def _is_scalar(x):
    return isinstance(x, (Quaternion, Number))

ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def involve(x: Scalar, tag: Involution) -> Scalar:
    if isinstance(x, Quaternion):
        if tag is Involution.quatconj:
            return x.conj()
        if tag is Involution.quatsemiconj:
            return x.semiconj()
        raise ContextError(f"Involution '{tag.value}' is not defined on quaternions")
    if tag is Involution.identity or isinstance(x, (int, float)):
        return x
    # both quaternion involutions restrict to complex conjugation on C
    return complex(x).conjugate()


class QMatrix:
    """Matrix with quaternion entries, stored as Z1 + Z2 j."""

    __array_ufunc__ = None

    def __init__(self, z1, z2=None):
        z1 = np.array(z1, dtype=complex, ndmin=2)
        z2 = np.zeros_like(z1) if z2 is None else np.array(z2, dtype=complex, ndmin=2)
        if z1.ndim != 2 or z1.shape != z2.shape:
            raise ValueError(f"Quaternion component shapes differ: {z1.shape} vs {z2.shape}")
        self.z1 = z1
        self.z2 = z2

    @staticmethod
    def identity(n: int):
        return QMatrix(np.eye(n, dtype=complex))

    @staticmethod
    def zeros(rows: int, cols: int):
        return QMatrix(np.zeros((rows, cols), dtype=complex))

    @staticmethod
    def of(m: Matrix):
        return m if isinstance(m, QMatrix) else QMatrix(m)

    @staticmethod
    def from_entries(rows: Sequence[Sequence[Scalar]]):
        entries = [[Quaternion.of(x).split for x in row] for row in rows]
        z = np.array(entries, dtype=complex).reshape(len(rows), -1, 2)
        return QMatrix(z[:, :, 0], z[:, :, 1])

    @staticmethod
    def from_embedding(e: np.ndarray):
        n = e.shape[0] // 2
        return QMatrix(e[:n, :n], e[:n, n:])

    @staticmethod
    def pull_back(u: np.ndarray):
        """Quaternion columns v with embed(Q) u = u x iff Q v = v x, for u = [v1; -conj(v2)]."""
        n = u.shape[0] // 2
        return QMatrix(u[:n], -u[n:].conj())

    @staticmethod
    def hstack(blocks: Sequence[QMatrix]):
        return QMatrix(np.hstack([b.z1 for b in blocks]), np.hstack([b.z2 for b in blocks]))

    @staticmethod
    def block_diag(blocks: Sequence[QMatrix]):
        n = sum(b.shape[0] for b in blocks)
        result = QMatrix.zeros(n, n)
        i = 0
        for b in blocks:
            k = b.shape[0]
            result.z1[i : i + k, i : i + k] = b.z1
            result.z2[i : i + k, i : i + k] = b.z2
            i += k
        return result

    @property
    def shape(self) -> tuple[int, int]:
        return self.z1.shape  # type: ignore

    def entry(self, i: int, j: int):
        return Quaternion.from_split(self.z1[i, j], self.z2[i, j])

    def entries(self):
        return [[self.entry(i, j) for j in range(self.shape[1])] for i in range(self.shape[0])]

    def __getitem__(self, key):
        if isinstance(key, tuple) and all(isinstance(k, (int, np.integer)) for k in key):
            return self.entry(*key)
        return QMatrix(self.z1[key], self.z2[key])

    def copy(self):
        return QMatrix(self.z1.copy(), self.z2.copy())

    def __add__(self, other):
        o = QMatrix.of(other)
        return QMatrix(self.z1 + o.z1, self.z2 + o.z2)

    __radd__ = __add__

    def __sub__(self, other):
        o = QMatrix.of(other)
        return QMatrix(self.z1 - o.z1, self.z2 - o.z2)

    def __rsub__(self, other):
        return QMatrix.of(other) - self

    def __neg__(self):
        return QMatrix(-self.z1, -self.z2)

    def __mul__(self, scalar: Scalar):
        """Right multiplication by a scalar."""
        w1, w2 = Quaternion.of(scalar).split
        return QMatrix(
            self.z1 * w1 - self.z2 * w2.conjugate(), self.z1 * w2 + self.z2 * w1.conjugate()
        )

    def __rmul__(self, scalar: Scalar):
        """Left multiplication by a scalar."""
        w1, w2 = Quaternion.of(scalar).split
        return QMatrix(w1 * self.z1 - w2 * self.z2.conj(), w1 * self.z2 + w2 * self.z1.conj())

    def __matmul__(self, other):
        o = QMatrix.of(other)
        return QMatrix(
            self.z1 @ o.z1 - self.z2 @ o.z2.conj(), self.z1 @ o.z2 + self.z2 @ o.z1.conj()
        )

    def __rmatmul__(self, other):
        return QMatrix.of(other) @ self

    @property
    def T(self):
        return QMatrix(self.z1.T, self.z2.T)

    def conj(self):
        return QMatrix(self.z1.conj(), -self.z2)

    def semiconj(self):
        return QMatrix(self.z1.conj(), self.z2)

    def involve(self, tag: Involution):
        if tag is Involution.quatconj:
            return self.conj()
        if tag is Involution.quatsemiconj:
            return self.semiconj()
        raise ContextError(f"Involution '{tag.value}' is not defined on quaternions")

    def embed(self):
        return np.block([[self.z1, self.z2], [-self.z2.conj(), self.z1.conj()]])

    def push(self):
        """Stack each column v as [v1; -conj(v2)], the inverse of pull_back."""
        return np.vstack([self.z1, -self.z2.conj()])

    def inv(self):
        return QMatrix.from_embedding(np.linalg.inv(self.embed()))

    def norm(self):
        return float(np.sqrt(np.linalg.norm(self.z1) ** 2 + np.linalg.norm(self.z2) ** 2))

    def is_complex(self, tol=0.0):
        return float(np.linalg.norm(self.z2)) <= tol * max(self.norm(), 1.0)

    def __repr__(self):
        return f"QMatrix({self.entries()})"


Matrix = Union[np.ndarray, QMatrix]


def st_transpose(m: Matrix, tag: Involution) -> Matrix:
    if isinstance(m, QMatrix):
        return m.involve(tag).T
    if tag is Involution.identity:
        return m.T
    if tag is Involution.conj:
        return m.conj().T
    raise ContextError(f"Involution '{tag.value}' needs a quaternion matrix")


def realify(z: complex) -> np.ndarray:
    z = complex(z)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def realify_matrix(m: np.ndarray) -> np.ndarray:
    """Replace every complex entry by its 2x2 real block."""
    n, k = m.shape
    result = np.zeros((2 * n, 2 * k))
    result[0::2, 0::2] = m.real
    result[0::2, 1::2] = -m.imag
    result[1::2, 0::2] = m.imag
    result[1::2, 1::2] = m.real
    return result


def complexify(m: np.ndarray, tol=1e-12) -> np.ndarray:
    """Inverse of realify_matrix, fails if the blocks are not of the form [[a, -b], [b, a]]."""
    re, im = m[0::2, 0::2], m[1::2, 0::2]
    if not (np.allclose(m[1::2, 1::2], re, atol=tol) and np.allclose(m[0::2, 1::2], -im, atol=tol)):
        raise ValueError("Matrix is not the realification of a complex matrix")
    return re + 1j * im


def adjoint_embed(q: QMatrix) -> np.ndarray:
    return q.embed()


def complex_view(m: Matrix) -> np.ndarray:
    """Complex matrix with the same eigenvalues: the embedding for quaternions."""
    if isinstance(m, QMatrix):
        return adjoint_embed(m)
    return np.asarray(m, dtype=complex)


def identity(field: Field, n: int) -> Matrix:
    if field is Field.H:
        return QMatrix.identity(n)
    return np.eye(n, dtype=float if field is Field.R else complex)


def inverse(m: Matrix) -> Matrix:
    if isinstance(m, QMatrix):
        return m.inv()
    return np.linalg.inv(m)


def solve(a: Matrix, b: Matrix) -> Matrix:
    """a^-1 b without forming the inverse."""
    if isinstance(a, QMatrix) or isinstance(b, QMatrix):
        b = QMatrix.of(b)
        n = a.shape[0]
        x = np.linalg.solve(QMatrix.of(a).embed(), np.vstack([b.z1, -b.z2.conj()]))
        return QMatrix(x[:n], -x[n:].conj())
    return np.linalg.solve(a, b)


def power(m: Matrix, k: int) -> Matrix:
    if isinstance(m, QMatrix):
        e = m.embed()
        if k < 0:
            e = np.linalg.inv(e)
        return QMatrix.from_embedding(np.linalg.matrix_power(e, abs(k)))
    if k < 0:
        return np.linalg.matrix_power(np.linalg.inv(m), -k)
    return np.linalg.matrix_power(m, k)


def norm(m: Matrix) -> float:
    if isinstance(m, QMatrix):
        return m.norm()
    return float(np.linalg.norm(m))


def cond(m: Matrix) -> float:
    return float(np.linalg.cond(complex_view(m)))


def block_diag(blocks: Sequence[Matrix], field: Field) -> Matrix:
    if field is Field.H:
        return QMatrix.block_diag([QMatrix.of(b) for b in blocks])
    n = sum(b.shape[0] for b in blocks)
    result = np.zeros((n, n), dtype=float if field is Field.R else complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        result[i : i + k, i : i + k] = b
        i += k
    return result


def hstack(columns: Sequence[Matrix], field: Field, rows: int) -> Matrix:
    if field is Field.H:
        if not columns:
            return QMatrix.zeros(rows, 0)
        return QMatrix.hstack([QMatrix.of(c) for c in columns])
    dtype = float if field is Field.R else complex
    if not columns:
        return np.zeros((rows, 0), dtype=dtype)
    return np.hstack(columns).astype(dtype)
