"""Eigenvalue bookkeeping on residues modulo m = r^2 - 1.

Every nonzero eigenvalue of an r-selfadjoint operator satisfies x^(r^2 - 1) = 1, so it is
recorded exactly by its residue k (value e^(2 pi i k / m)). Numeric eigenvalues are snapped to
this finite set, eigenspaces are extracted with Lagrange spectral projectors.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple
import cmath
import math

import numpy as np
from scipy.linalg import qr, svdvals

from .scalars import ContextError, Field, Involution, Matrix, QMatrix, complex_view
from .settings import settings
from .util import MatpairError, logger as log


class SpectralError(MatpairError):
    pass


class SingularError(SpectralError):
    """A matrix that must be nonsingular is (numerically) singular."""


class SnapError(SpectralError):
    """An eigenvalue is not close to zero or an admissible root of unity."""


class NotDiagonalizableError(SpectralError):
    pass


class RankError(SpectralError):
    pass


def modulus(r: int):
    if abs(r) < 2:
        raise ContextError(f"Exponent r must satisfy |r| >= 2, got {r}")
    if abs(r) > settings.max_exponent:
        raise ContextError(f"Exponent |r| is limited to {settings.max_exponent}, got {r}")
    return r * r - 1


class Case(Enum):
    """The nine contexts of the classification: field, involution and form symmetry."""

    a1 = (Field.C, Involution.identity, 1)
    a2 = (Field.C, Involution.conj, 1)
    a3 = (Field.C, Involution.identity, -1)
    b1 = (Field.R, Involution.identity, 1)
    b2 = (Field.R, Involution.identity, -1)
    c1 = (Field.H, Involution.quatconj, 1)
    c2 = (Field.H, Involution.quatsemiconj, 1)
    c3 = (Field.H, Involution.quatconj, -1)
    c4 = (Field.H, Involution.quatsemiconj, -1)

    @property
    def field(self) -> Field:
        return self.value[0]

    @property
    def involution(self) -> Involution:
        return self.value[1]

    @property
    def epsilon(self) -> int:
        return self.value[2]

    @property
    def sesquilinear(self):
        return self.involution is not Involution.identity


class CaseTag(NamedTuple):
    case: Case
    r: int

    @property
    def m(self):
        return modulus(self.r)

    @property
    def field(self):
        return self.case.field

    @property
    def involution(self):
        return self.case.involution

    @property
    def epsilon(self):
        return self.case.epsilon

    def __str__(self):
        return f"{self.case.name} (r={self.r})"


class EigIndex(NamedTuple):
    """Zero (k is None) or the root of unity e^(2 pi i k / m)."""

    k: int | None
    m: int

    @staticmethod
    def zero(m: int):
        return EigIndex(None, m)

    @staticmethod
    def root(k: int, m: int):
        return EigIndex(k % m, m)

    @property
    def is_zero(self):
        return self.k is None

    @property
    def is_real(self):
        return self.k is None or (2 * self.k) % self.m == 0

    @property
    def value(self) -> complex:
        if self.k is None:
            return 0j
        quarter, rest = divmod(4 * self.k, self.m)
        if rest == 0:  # exact 1, i, -1, -i
            return (1, 1j, -1, -1j)[quarter % 4]
        return cmath.exp(2j * math.pi * self.k / self.m)

    @property
    def key(self):
        return -1 if self.k is None else self.k

    @property
    def label(self) -> str | int:
        return "zero" if self.k is None else self.k

    def __str__(self):
        return "zero" if self.k is None else f"{self.k} mod {self.m}"


def idx_pow_r(x: EigIndex, r: int):
    if x.is_zero:
        if r < 0:
            raise SingularError("Zero eigenvalue has no negative power")
        return x
    assert x.k is not None
    return EigIndex.root(r * x.k, x.m)


def idx_conj(x: EigIndex):
    if x.is_zero:
        return x
    assert x.k is not None
    return EigIndex.root(-x.k, x.m)


def standardize(x: EigIndex):
    """Representative in the closed upper half-plane, the quaternion convention."""
    return min(x, idx_conj(x), key=lambda y: y.key)


def admissible(x: EigIndex, r: int):
    return x.m == modulus(r) and (not x.is_zero or r > 0)


def all_indices(r: int):
    m = modulus(r)
    zero = [EigIndex.zero(m)] if r > 0 else []
    return zero + [EigIndex.root(k, m) for k in range(m)]


def pow_fixes(x: EigIndex, r: int):
    return idx_pow_r(x, r) == x


def pow_conjugates(x: EigIndex, r: int):
    return idx_pow_r(x, r) == idx_conj(x)


def pairing_image(x: EigIndex, tag: CaseTag):
    """Index y whose eigenspace is paired with the eigenspace of x by the form."""
    y = idx_pow_r(idx_conj(x), tag.r) if tag.case.sesquilinear else idx_pow_r(x, tag.r)
    return standardize(y) if tag.field is Field.H else y


def self_paired(x: EigIndex, tag: CaseTag):
    return pairing_image(x, tag) == x


def orbit(x: EigIndex, tag: CaseTag):
    """All indices identified with x in the block catalog of the case."""
    r = tag.r
    if tag.case in (Case.a1, Case.a3):
        moves = [lambda y: idx_pow_r(y, r)]
    elif tag.case is Case.a2:
        moves = [lambda y: idx_pow_r(idx_conj(y), r)]
    else:
        moves = [lambda y: idx_pow_r(y, r), idx_conj]
    result = {x}
    frontier = [x]
    while frontier:
        y = frontier.pop()
        for move in moves:
            z = move(y)
            if z not in result:
                result.add(z)
                frontier.append(z)
    return sorted(result, key=lambda y: y.key)


def snap_value(z: complex, r: int, tol: float):
    m = modulus(r)
    if abs(z) <= tol:
        if r < 0:
            raise SnapError(f"Eigenvalue {z:.3g} is zero but A must be nonsingular for r < 0")
        return EigIndex.zero(m)
    k = round(cmath.phase(z) * m / (2 * math.pi)) % m
    x = EigIndex.root(k, m)
    if abs(z - x.value) > tol:
        raise SnapError(
            f"Eigenvalue {z:.6g} is not within {tol:g} of zero or an {m}-th root of unity"
        )
    return x


@dataclass
class SpectrumReport:
    r: int
    entries: list[tuple[EigIndex, int]]
    observed: list[EigIndex] = field(default_factory=list)
    quaternion: bool = False

    @property
    def m(self):
        return modulus(self.r)

    @property
    def indices(self):
        return [x for x, _ in self.entries]

    @property
    def total(self):
        return sum(d for _, d in self.entries)

    def multiplicity(self, x: EigIndex):
        return next((d for y, d in self.entries if y == x), 0)

    def __iter__(self) -> Iterator[tuple[EigIndex, int]]:
        return iter(self.entries)

    def __str__(self):
        return ", ".join(f"{x}: {d}" for x, d in self.entries)


def numerical_rank(m: np.ndarray, threshold: float, relative=True):
    if m.size == 0:
        return 0
    s = svdvals(m)
    limit = threshold * s[0] if relative else threshold
    return int(np.sum(s > limit))


def snap_spectrum(a: Matrix, r: int, tol: float | None = None):
    """Snap the spectrum of A to admissible indices and check diagonalizability."""
    tol = settings.tol_snap if tol is None else tol
    quaternion = isinstance(a, QMatrix)
    e = complex_view(a)
    n = e.shape[0]
    counts: dict[EigIndex, int] = {}
    for z in np.linalg.eigvals(e) if n > 0 else []:
        x = snap_value(complex(z), r, tol)
        counts[x] = counts.get(x, 0) + 1

    scale = max(1.0, float(np.linalg.norm(e, 2))) if n > 0 else 1.0
    for x, count in counts.items():
        geometric = n - numerical_rank(e - x.value * np.eye(n), tol * scale, relative=False)
        if geometric != count:
            raise NotDiagonalizableError(
                f"Eigenvalue {x} has multiplicity {count} but {geometric} independent"
                " eigenvectors, only diagonalizable operators are classified"
            )

    observed = sorted(counts, key=lambda x: x.key)
    if quaternion or np.isrealobj(a):
        for x in observed:
            if counts[x] != counts.get(idx_conj(x), 0):
                raise SnapError(f"Spectrum is not closed under conjugation at {x}")

    if quaternion:
        entries = []
        for x in observed:
            if standardize(x) == x:
                if x.is_real and counts[x] % 2 != 0:
                    raise SnapError(f"Real eigenvalue {x} of a quaternion matrix has odd count")
                entries.append((x, counts[x] // 2 if x.is_real else counts[x]))
    else:
        entries = [(x, counts[x]) for x in observed]
    report = SpectrumReport(r, entries, observed, quaternion)
    log.debug(f"Spectrum (r={r}): {report}")
    return report


def projector(e: np.ndarray, x: EigIndex, observed: list[EigIndex]):
    """Lagrange spectral projector of a diagonalizable complex matrix onto E_x."""
    n = e.shape[0]
    p = np.eye(n, dtype=complex)
    for y in observed:
        if y != x:
            p = p @ (e - y.value * np.eye(n)) / (x.value - y.value)
    return p


def _pivot_columns(p: np.ndarray, count: int):
    _, _, piv = qr(p, mode="economic", pivoting=True)
    return sorted(int(i) for i in piv[:count])


def _quaternion_span(candidates: QMatrix, count: int, tol: float):
    """Orthonormal quaternion basis of the right H-span of the candidate columns."""
    basis: list[QMatrix] = []
    for i in range(candidates.shape[1]):
        v = candidates[:, [i]]
        size = v.norm()
        for b in basis:
            v = v - b @ (b.conj().T @ v)
        if v.norm() > tol * size:
            basis.append(v * (1 / v.norm()))
        if len(basis) == count:
            break
    if len(basis) < count:
        raise RankError(f"Found {len(basis)} of {count} quaternion eigenvectors")
    return QMatrix.hstack(basis)


def eigenbasis(
    a: Matrix, x: EigIndex, report: SpectrumReport, eps_rank: float | None = None
) -> Matrix:
    """Basis B of the eigenspace of x: A B = B value(x).

    Real and complex matrices give a complex basis. Quaternion matrices give a quaternion
    basis, value(x) acting by right multiplication.
    """
    eps_rank = settings.eps_rank if eps_rank is None else eps_rank
    d = report.multiplicity(x)
    if d == 0:
        raise RankError(f"Index {x} is not in the spectrum")
    e = complex_view(a)
    p = projector(e, x, report.observed)
    complex_dim = 2 * d if report.quaternion and x.is_real else d
    rank = numerical_rank(p, eps_rank)
    if rank != complex_dim:
        raise RankError(f"Projector onto {x} has rank {rank}, expected {complex_dim}")
    columns = p[:, _pivot_columns(p, complex_dim)]
    if not report.quaternion:
        return columns
    vectors = QMatrix.pull_back(columns)
    if not x.is_real:
        return vectors
    return _quaternion_span(vectors, d, settings.tol_snap)
