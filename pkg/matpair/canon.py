"""Canonical forms of pairs (A, F) with A^st F = F A^r and explicit transformation witnesses.

A canonical form is a sorted tuple of blocks. One blocks are 1x1 pairs ([x], [s]) with a form
scalar s, Two blocks pair the eigenvalue x with its partner under a 2x2 form block
[[0, sigma], [1, 0]]. Over the reals nonreal eigenvalues are realified, a + bi -> [[a, -b], [b, a]].
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence
import cmath
import math

import numpy as np
from scipy.linalg import eigh

from .scalars import ContextError, Field, Involution, Matrix, QMatrix, Quaternion, Scalar
from .scalars import ONE, I, J, K, block_diag, check_context, hstack, involve, norm, realify
from .scalars import solve, st_transpose
from .spectral import Case, CaseTag, EigIndex, SingularError, SpectrumReport
from .spectral import eigenbasis, idx_conj, idx_pow_r, orbit, pairing_image
from .spectral import pow_conjugates, pow_fixes, self_paired, snap_spectrum
from .settings import Tolerances, settings
from .util import MatpairError, logger as log, relative

if TYPE_CHECKING:
    from .instance import MatrixPair


class UnsupportedContext(ContextError):
    pass


class SymmetryError(MatpairError):
    pass


class PairingDimensionMismatch(MatpairError):
    pass


class DeflationStall(MatpairError):
    """No vector with F(v, v) != 0 was found where the block catalog requires one."""


class NormalizeError(MatpairError):
    pass


class WitnessError(MatpairError):
    pass


class BlockKind(Enum):
    one = "one"
    two = "two"


class PartnerRule(Enum):
    pow_r = "PowR"
    conj_pow_r = "ConjPowR"


class FormScalar(Enum):
    plus_one = "+1"
    minus_one = "-1"
    plus_i = "+i"
    minus_i = "-i"
    plus_j = "+j"

    @property
    def quaternion(self) -> Quaternion:
        return _form_scalar_values[self]

    @property
    def number(self) -> complex:
        q = self.quaternion
        if not q.is_complex:
            raise ValueError(f"Form scalar {self.value} is not a complex number")
        return complex(q.a, q.b)

    @property
    def order(self):
        return _form_scalar_order.index(self)

    @staticmethod
    def signed(positive: bool, imaginary=False):
        if imaginary:
            return FormScalar.plus_i if positive else FormScalar.minus_i
        return FormScalar.plus_one if positive else FormScalar.minus_one


_form_scalar_values = {
    FormScalar.plus_one: ONE,
    FormScalar.minus_one: -ONE,
    FormScalar.plus_i: I,
    FormScalar.minus_i: -I,
    FormScalar.plus_j: J,
}
_form_scalar_order = list(FormScalar)


class Constraint(Enum):
    complex_only = "ComplexOnly"
    full_h = "FullH"


@dataclass(frozen=True)
class CanonicalBlock:
    kind: BlockKind
    index: EigIndex
    scalar: FormScalar | None = None
    rule: PartnerRule | None = None
    off_sign: int = 0
    realified: bool = False

    @staticmethod
    def one(index: EigIndex, scalar: FormScalar, realified=False):
        return CanonicalBlock(BlockKind.one, index, scalar=scalar, realified=realified)

    @staticmethod
    def two(index: EigIndex, rule: PartnerRule, off_sign: int, realified=False):
        return CanonicalBlock(
            BlockKind.two, index, rule=rule, off_sign=off_sign, realified=realified
        )

    @property
    def size(self):
        if self.kind is BlockKind.one:
            return 2 if self.realified else 1
        if self.realified and self.rule is PartnerRule.conj_pow_r:
            return 4
        return 2

    @property
    def key(self):
        return (
            0 if self.kind is BlockKind.one else 1,
            self.index.key,
            self.scalar.order if self.scalar else len(_form_scalar_order),
            self.rule.value if self.rule else "",
            self.off_sign,
            self.realified,
        )

    def partner(self, r: int):
        if self.rule is PartnerRule.pow_r:
            return idx_pow_r(self.index, r)
        return idx_pow_r(idx_conj(self.index), r)


@dataclass(frozen=True)
class CanonicalForm:
    tag: CaseTag
    blocks: tuple[CanonicalBlock, ...]

    @staticmethod
    def create(tag: CaseTag, blocks: Sequence[CanonicalBlock]):
        return CanonicalForm(tag, tuple(sorted(blocks, key=lambda b: b.key)))

    @property
    def size(self):
        return sum(b.size for b in self.blocks)

    def __str__(self):
        lines = [f"case {self.tag}, m = {self.tag.m}"]
        lines += [f"  {describe(b, self.tag)}" for b in self.blocks]
        return "\n".join(lines)


@dataclass
class TransformWitness:
    S: Matrix
    residual_similarity: float
    residual_congruence: float

    @property
    def residual(self):
        return max(self.residual_similarity, self.residual_congruence)


_cases = {(c.field, c.involution, c.epsilon): c for c in Case}


def classify_case(field: Field, involution: Involution, epsilon: int) -> Case:
    check_context(field, involution)
    if epsilon not in (1, -1):
        raise ContextError(f"Form symmetry must be +1 or -1, got {epsilon}")
    if field is Field.C and involution is Involution.conj and epsilon == -1:
        raise UnsupportedContext(
            "Skew-Hermitian forms over C are not classified: multiply F by i, the result is"
            " Hermitian"
        )
    return _cases[(field, involution, epsilon)]


def orbit_rep(x: EigIndex, tag: CaseTag):
    return orbit(x, tag)[0]


def inertia(g: Matrix, involution: Involution | None = None) -> tuple[int, int]:
    """Numbers of positive and negative eigenvalues of a symmetric or Hermitian form."""
    if isinstance(g, QMatrix):
        if (involution or Involution.quatconj) is not Involution.quatconj:
            raise SymmetryError("Quaternion inertia is defined for quaternion conjugation")
        h, factor = g.embed(), 2
    else:
        h, factor = np.asarray(g), 1
        if involution is Involution.identity and not np.allclose(np.imag(h), 0):
            raise SymmetryError("Complex symmetric forms have no inertia")
    scale = float(np.linalg.norm(h))
    if float(np.linalg.norm(h - h.conj().T)) > 1e-8 * scale:
        raise SymmetryError("Form is not symmetric or Hermitian")
    w = np.linalg.eigvalsh((h + h.conj().T) / 2)
    if scale == 0 or np.min(np.abs(w)) <= settings.eps_rank * np.max(np.abs(w)):
        raise SingularError("Form is singular")
    return int(np.sum(w > 0)) // factor, int(np.sum(w < 0)) // factor


def scalar_orbit_normalize(
    c: Scalar, constraint: Constraint, tag: CaseTag, tol=1e-6
) -> tuple[FormScalar, Scalar]:
    """Find the catalog scalar reachable from c and q with involve(q) c q equal to it."""
    case = tag.case
    h = Quaternion.of(c)
    size = abs(h)
    if size == 0:
        raise NormalizeError("Cannot normalize a zero form value")
    if case in (Case.a3, Case.b2):
        raise NormalizeError(f"Case {case.name} has no 1x1 blocks")
    if case.field is Field.H:
        if abs(tag.epsilon * involve(h, case.involution) - h) > tol * size:
            raise NormalizeError(f"{h} is not symmetric for case {case.name}")
    elif not h.is_close(complex(h.a, h.b), tol * size):
        raise NormalizeError(f"{h} is not a {case.field.value} scalar")
    elif case is not Case.a1 and abs(h.b) > tol * size:
        raise NormalizeError(f"{h} is not real as required in case {case.name}")

    if case is Case.a1:
        return FormScalar.plus_one, 1 / cmath.sqrt(complex(h.a, h.b))
    if case in (Case.a2, Case.b1):
        return FormScalar.signed(h.a > 0), 1 / math.sqrt(abs(h.a))
    if case is Case.c1:
        return FormScalar.signed(h.a > 0), Quaternion(1 / math.sqrt(abs(h.a)))
    if case is Case.c4:
        return FormScalar.signed(h.b > 0, imaginary=True), Quaternion(1 / math.sqrt(abs(h.b)))

    z1, z2 = h.split
    if constraint is Constraint.complex_only:
        if abs(z1) <= tol * size:  # c = z j, normalized to j by q = conj(sqrt(1/z))
            return FormScalar.plus_j, Quaternion.of(cmath.sqrt(1 / z2).conjugate())
        if abs(z2) > tol * size:
            raise NormalizeError(f"{h} cannot be normalized by a complex scalar")
        if case is Case.c2:
            return FormScalar.signed(h.a > 0), Quaternion(1 / math.sqrt(abs(h.a)))
        return FormScalar.signed(h.b > 0, imaginary=True), Quaternion(1 / math.sqrt(abs(h.b)))

    # Any unit pure quaternion p is rotated onto i by u = (1 - p i)/|1 - p i|, or by j if p = -i.
    # For c2 the form value is turned into a pure quaternion first: q^ c q = -i conj(q) (i c) q.
    p = I * h if case is Case.c2 else h
    p = Quaternion(0.0, p.b, p.c, p.d) / size
    u = ONE - p * I
    u = J if abs(u) < 1e-8 else u / abs(u)
    target = FormScalar.plus_one if case is Case.c2 else FormScalar.plus_i
    return target, u / math.sqrt(size)


def _unit_square_root(c: Scalar) -> tuple[FormScalar, Scalar]:
    return FormScalar.plus_one, 1 / cmath.sqrt(complex(c))


def _two_form(off_sign: int, case: Case):
    """Off-diagonal form block, the sign sits lower-left in a3 and upper-right elsewhere."""
    if case is Case.a3:
        return np.array([[0.0, 1.0], [float(off_sign), 0.0]])
    return np.array([[0.0, float(off_sign)], [1.0, 0.0]])


def _block_pair(block: CanonicalBlock, tag: CaseTag) -> tuple[Matrix, Matrix]:
    v = block.index.value
    if block.kind is BlockKind.one:
        s = block.scalar
        assert s is not None
        if tag.field is Field.H:
            return QMatrix([[v]]), QMatrix.from_entries([[s.quaternion]])
        if block.realified:
            return realify(v), s.number.real * np.eye(2)
        if tag.field is Field.R:
            return np.array([[v.real]]), np.array([[s.number.real]])
        return np.array([[v]], dtype=complex), np.array([[s.number]])

    form = _two_form(block.off_sign, tag.case)
    w = block.partner(tag.r).value
    if block.realified:
        if block.rule is PartnerRule.pow_r:
            return realify(v), form
        return block_diag([realify(v), realify(w)], Field.R), np.kron(form, np.eye(2))
    a = np.diag([v, w])
    if tag.field is Field.H:
        return QMatrix(a), QMatrix(form)
    if tag.field is Field.R:
        return a.real, form
    return a, form.astype(complex)


def block_matrices(cf: CanonicalForm) -> tuple[Matrix, Matrix]:
    pairs = [_block_pair(b, cf.tag) for b in cf.blocks]
    return (
        block_diag([a for a, _ in pairs], cf.tag.field),
        block_diag([f for _, f in pairs], cf.tag.field),
    )


def _value_label(x: EigIndex, realified=False):
    if x.is_zero:
        text = "0"
    elif x.is_real:
        text = "1" if x.k == 0 else "-1"
    else:
        text = f"w{x.m}^{x.k}"
    return f"{text}^R" if realified else text


def describe(block: CanonicalBlock, tag: CaseTag):
    """Block in catalog notation, w<m>^<k> standing for exp(2 pi i k / m)."""
    x = block.index
    if block.kind is BlockKind.one:
        s = block.scalar.value if block.scalar else "?"
        if block.realified:
            return f"({_value_label(x, True)}, {s[0].replace('+', '')}I2)"
        return f"([{_value_label(x)}], [{s}])"
    sigma = "1" if block.off_sign > 0 else "-1"
    y = block.partner(tag.r)
    if block.realified and block.rule is PartnerRule.pow_r:
        return f"({_value_label(x, True)}, [[0,{sigma}],[1,0]])"
    if block.realified:
        s = "I2" if block.off_sign > 0 else "-I2"
        diag = f"diag({_value_label(x, True)}, {_value_label(y, True)})"
        return f"({diag}, [[0,{s}],[I2,0]])"
    if tag.case is Case.a3:
        return f"(diag({_value_label(x)}, {_value_label(y)}), [[0,1],[{sigma},0]])"
    return f"(diag({_value_label(x)}, {_value_label(y)}), [[0,{sigma}],[1,0]])"


def _hermitian_frame(h: np.ndarray, eps: float, scale=1.0):
    """T with T^* h T = scale^2 diag(+1, ..., -1, ...), positive directions first."""
    h = (h + h.conj().T) / 2
    d = h.shape[0]
    off_diagonal = h - np.diag(np.diag(h))
    if np.linalg.norm(off_diagonal) <= 1e-12 * np.linalg.norm(h):
        w, u = np.diag(h).real, np.eye(d)
    else:
        w, u = eigh(h)
    if np.linalg.norm(h) == 0 or np.min(np.abs(w)) <= eps * np.max(np.abs(w)):
        raise SingularError("Form restricted to an eigenspace is singular")
    order = [i for i in range(d) if w[i] > 0] + [i for i in range(d) if w[i] < 0]
    t = u[:, order] * (scale / np.sqrt(np.abs(w[order])))
    return [w[i] > 0 for i in order], t


def _symplectic_frame(g: np.ndarray, tau: complex, eps: float):
    """Columns u_i, w_i with u_i^T g w_k = tau delta_ik and all other pairings zero."""
    d = g.shape[0]
    cols = [np.eye(d, dtype=g.dtype)[:, [i]] for i in range(d)]
    scale = float(np.linalg.norm(g))
    us, ws = [], []
    while cols:
        z = np.hstack(cols)
        upper = np.triu(np.abs(z.T @ g @ z), 1)
        a, b = np.unravel_index(np.argmax(upper), upper.shape) if len(cols) > 1 else (0, 0)
        if len(cols) < 2 or upper[a, b] <= eps * scale:
            raise SingularError("Skew form restricted to an eigenspace is degenerate")
        u = cols[a]
        w = cols[b] * (tau / (u.T @ g @ cols[b])[0, 0])
        rest = [c for i, c in enumerate(cols) if i not in (a, b)]
        cols = [
            c + u * ((w.T @ g @ c)[0, 0] / tau) - w * ((u.T @ g @ c)[0, 0] / tau) for c in rest
        ]
        us.append(u)
        ws.append(w)
    return np.hstack(us), np.hstack(ws)


def _deflate(
    g: Matrix,
    involution: Involution,
    normalize: Callable[[Scalar], tuple[FormScalar, Scalar]],
    tol: Tolerances,
):
    """Split coordinate space into F-orthogonal vectors with normalized F(v, v).

    Works for complex bilinear forms (numpy) and quaternion forms (QMatrix). Candidates are
    coordinate vectors, then sums of two of them, then random combinations.
    """
    quaternion = isinstance(g, QMatrix)
    d = g.shape[0]
    ident = QMatrix.identity(d) if quaternion else np.eye(d, dtype=complex)
    cols: list = [ident[:, [i]] for i in range(d)]
    units = [ONE, I, J, K] if quaternion else [1, 1j]
    scale = norm(g)
    rng = np.random.default_rng(0)

    def form(u, w):
        value = st_transpose(u, involution) @ g @ w
        return value.entry(0, 0) if quaternion else complex(value[0, 0])

    def random_coefficient():
        if quaternion:
            return Quaternion(*rng.standard_normal(4))
        return complex(*rng.standard_normal(2))

    def candidates():
        for a in range(len(cols)):
            yield cols[a], a
        for a in range(len(cols)):
            for b in range(a + 1, len(cols)):
                for unit in units:
                    yield cols[a] + cols[b] * unit, a
        for _ in range(tol.deflate_trials):
            coeffs = [random_coefficient() for _ in cols]
            v = cols[0] * coeffs[0]
            for col, coeff in zip(cols[1:], coeffs[1:]):
                v = v + col * coeff
            yield v, int(np.argmax([abs(x) for x in coeffs]))

    targets: list[FormScalar] = []
    frame = []
    while cols:
        for v, drop in candidates():
            c = form(v, v)
            if abs(c) > tol.eps_deflate * scale * norm(v) ** 2:
                break
            log.debug(f"Deflation candidate rejected, |F(v,v)| = {abs(c):.3g}")
        else:
            raise DeflationStall(
                f"No vector with nonzero F(v,v) among {len(cols)} remaining directions"
            )
        target, q = normalize(c)
        v = v * q
        t_inv = target.quaternion.inverse() if quaternion else 1 / target.number
        rest = [w for i, w in enumerate(cols) if i != drop]
        cols = [w - v * (t_inv * form(v, w)) for w in rest]
        targets.append(target)
        frame.append(v)
    return targets, hstack(frame, Field.H if quaternion else Field.C, d)


def _unit_columns(b: np.ndarray, size: float):
    """Columns rescaled to norm size, with the leading significant entry real and positive."""
    result = b.copy()
    for i in range(b.shape[1]):
        column = b[:, i]
        n = np.linalg.norm(column)
        lead = column[np.flatnonzero(np.abs(column) > 1e-8 * n)[0]]
        result[:, i] = column * (size / n) * (abs(lead) / lead)
    return result


def _realify_columns(v: np.ndarray, conjugate=False):
    """Real columns [Re v, -Im v] spanning x^R, or [Re v, Im v] for conj(x)^R."""
    return np.hstack([v.real, v.imag if conjugate else -v.imag])


class _Canonicalizer:
    def __init__(self, pair: MatrixPair):
        self.a, self.f = pair.A, pair.F
        self.tag = pair.tag
        self.tol = pair.tolerances
        self.n = pair.n
        self.sigma = self.tag.epsilon
        # upper-right entry of the Two form block
        self.upper = 1 if self.tag.case is Case.a3 else self.sigma
        self.report: SpectrumReport = snap_spectrum(self.a, self.tag.r, self.tol.tol_snap)
        self.pieces: list[tuple[CanonicalBlock, Matrix]] = []
        self._bases: dict[EigIndex, Matrix] = {}

    def basis(self, x: EigIndex):
        if x not in self._bases:
            self._bases[x] = eigenbasis(self.a, x, self.report, self.tol.eps_rank)
        return self._bases[x]

    def gram(self, u: Matrix, w: Matrix):
        return st_transpose(u, self.tag.involution) @ self.f @ w

    def emit(self, block: CanonicalBlock, *columns: Matrix):
        self.pieces.append((block, hstack(columns, self.tag.field, self.n)))

    def run(self):
        for x, d in self.report:
            y = pairing_image(x, self.tag)
            if self.report.multiplicity(y) != d:
                raise PairingDimensionMismatch(
                    f"Eigenvalue {x} has multiplicity {d} but its partner {y} has"
                    f" {self.report.multiplicity(y)}"
                )
        process = {Field.C: self.complex_orbit, Field.R: self.real_orbit}
        process[Field.H] = self.quaternion_orbit
        for x, _ in self.report:
            if orbit_rep(x, self.tag) == x:
                process[self.tag.field](x)

    def couple(self, x: EigIndex, bx: Matrix, by: Matrix, rule: PartnerRule):
        g = self.gram(bx, by)
        try:
            by = (by @ (g.inv() if isinstance(g, QMatrix) else np.linalg.inv(g))) * self.upper
        except np.linalg.LinAlgError as e:
            raise SingularError(f"Eigenspaces of {x} and its partner are not paired: {e}")
        for i in range(bx.shape[1]):
            self.emit(CanonicalBlock.two(x, rule, self.sigma), bx[:, [i]], by[:, [i]])

    def complex_orbit(self, x: EigIndex):
        case = self.tag.case
        y = pairing_image(x, self.tag)
        bx = self.basis(x)
        if y != x:
            rule = PartnerRule.conj_pow_r if case is Case.a2 else PartnerRule.pow_r
            self.couple(x, bx, self.basis(y), rule)
        elif case is Case.a1:
            targets, frame = _deflate(
                self.gram(bx, bx),
                Involution.identity,
                lambda c: scalar_orbit_normalize(c, Constraint.complex_only, self.tag),
                self.tol,
            )
            b = bx @ frame
            for i, target in enumerate(targets):
                self.emit(CanonicalBlock.one(x, target), b[:, [i]])
        elif case is Case.a2:
            signs, t = _hermitian_frame(self.gram(bx, bx), self.tol.eps_rank)
            b = bx @ t
            for i, positive in enumerate(signs):
                self.emit(CanonicalBlock.one(x, FormScalar.signed(positive)), b[:, [i]])
        else:
            us, ws = _symplectic_frame(self.gram(bx, bx), self.upper, self.tol.eps_rank)
            for i in range(us.shape[1]):
                block = CanonicalBlock.two(x, PartnerRule.pow_r, self.sigma)
                self.emit(block, bx @ us[:, [i]], bx @ ws[:, [i]])

    def real_orbit(self, x: EigIndex):
        r, case, sigma = self.tag.r, self.tag.case, self.sigma
        bx = self.basis(x)
        if x.is_real:
            b = bx.real
            g = b.T @ self.f @ b
            if case is Case.b1:
                signs, t = _hermitian_frame(g, self.tol.eps_rank)
                b = b @ t
                for i, positive in enumerate(signs):
                    self.emit(CanonicalBlock.one(x, FormScalar.signed(positive)), b[:, [i]])
            else:
                us, ws = _symplectic_frame(g, sigma, self.tol.eps_rank)
                for i in range(us.shape[1]):
                    block = CanonicalBlock.two(x, PartnerRule.pow_r, sigma)
                    self.emit(block, b @ us[:, [i]], b @ ws[:, [i]])
        elif pow_fixes(x, r):
            g = bx.T @ self.f @ bx
            if case is Case.b1:
                # v^T F v = -2i turns [Re v, -Im v] into the block (x^R, [[0,1],[1,0]])
                _, frame = _deflate(g, Involution.identity, _unit_square_root, self.tol)
                v = bx @ frame * (1 - 1j)
                for i in range(v.shape[1]):
                    block = CanonicalBlock.two(x, PartnerRule.pow_r, sigma, realified=True)
                    self.emit(block, _realify_columns(v[:, [i]]))
            else:
                us, ws = _symplectic_frame(g, 2 * sigma, self.tol.eps_rank)
                u, w = bx @ us, bx @ ws
                for i in range(u.shape[1]):
                    block = CanonicalBlock.two(x, PartnerRule.conj_pow_r, sigma, realified=True)
                    self.emit(
                        block, _realify_columns(u[:, [i]]), _realify_columns(w[:, [i]], True)
                    )
        elif pow_conjugates(x, r):
            h = bx.conj().T @ self.f @ bx
            if case is Case.b1:
                signs, t = _hermitian_frame(h, self.tol.eps_rank, math.sqrt(2))
                v = bx @ t
                for i, positive in enumerate(signs):
                    block = CanonicalBlock.one(x, FormScalar.signed(positive), realified=True)
                    self.emit(block, _realify_columns(v[:, [i]]))
            else:
                # v^* F v = 2i gives (x^R, L); -2i gives (conj(x)^R, L) on [Re v, Im v]
                signs, t = _hermitian_frame(-1j * h, self.tol.eps_rank, math.sqrt(2))
                v = bx @ t
                for i, positive in enumerate(signs):
                    index = x if positive else idx_conj(x)
                    block = CanonicalBlock.two(index, PartnerRule.pow_r, sigma, realified=True)
                    self.emit(block, _realify_columns(v[:, [i]], conjugate=not positive))
        else:
            bx = _unit_columns(bx, math.sqrt(2))
            by = self.basis(idx_pow_r(x, r))
            g = bx.T @ self.f @ by
            try:
                by = by @ np.linalg.inv(g) * (2 * sigma)
            except np.linalg.LinAlgError as e:
                raise SingularError(f"Eigenspaces of {x} and its partner are not paired: {e}")
            for i in range(bx.shape[1]):
                block = CanonicalBlock.two(x, PartnerRule.conj_pow_r, sigma, realified=True)
                self.emit(
                    block, _realify_columns(bx[:, [i]]), _realify_columns(by[:, [i]], True)
                )

    def quaternion_orbit(self, x: EigIndex):
        r, case, sigma = self.tag.r, self.tag.case, self.sigma
        bx = self.basis(x)
        if not self_paired(x, self.tag):
            y = pairing_image(x, self.tag)
            by = self.basis(y)
            if idx_pow_r(idx_conj(x), r) != y:
                by = by * J  # right multiplication by j conjugates the eigenvalue
            self.couple(x, bx, by, PartnerRule.conj_pow_r)
        elif x.is_real:
            targets, frame = _deflate(
                self.gram(bx, bx),
                self.tag.involution,
                lambda c: scalar_orbit_normalize(c, Constraint.full_h, self.tag),
                self.tol,
            )
            b = bx @ frame
            for i, target in enumerate(targets):
                self.emit(CanonicalBlock.one(x, target), b[:, [i]])
        elif pow_conjugates(x, r):
            z = self._component(self.gram(bx, bx), complex_part=True)
            imaginary = case in (Case.c3, Case.c4)
            signs, t = _hermitian_frame(-1j * z if imaginary else z, self.tol.eps_rank)
            b = bx @ QMatrix(t)
            for i, positive in enumerate(signs):
                block = CanonicalBlock.one(x, FormScalar.signed(positive, imaginary))
                self.emit(block, b[:, [i]])
        else:
            # F(v, w) = z j on the eigenspace, with z symmetric (c2, c3) or skew (c1, c4)
            z = self._component(self.gram(bx, bx), complex_part=False)
            if case in (Case.c2, Case.c3):
                _, w = _deflate(z, Involution.identity, _unit_square_root, self.tol)
                b = bx @ QMatrix(w.conj())
                for i in range(b.shape[1]):
                    self.emit(CanonicalBlock.one(x, FormScalar.plus_j), b[:, [i]])
            else:
                us, ws = _symplectic_frame(z, -sigma, self.tol.eps_rank)
                u = bx @ QMatrix(us.conj())
                w = (bx @ QMatrix(ws.conj())) * J
                for i in range(u.shape[1]):
                    block = CanonicalBlock.two(x, PartnerRule.conj_pow_r, sigma)
                    self.emit(block, u[:, [i]], w[:, [i]])

    def _component(self, g: QMatrix, complex_part: bool):
        keep, drop = (g.z1, g.z2) if complex_part else (g.z2, g.z1)
        if np.linalg.norm(drop) > self.tol.tol_snap * max(g.norm(), 1.0):
            raise SymmetryError("Form on an eigenspace does not have the expected structure")
        return keep

    def result(self):
        pieces = sorted(self.pieces, key=lambda p: p[0].key)
        form = CanonicalForm(self.tag, tuple(b for b, _ in pieces))
        assert form.size == self.n, f"blocks cover {form.size} of {self.n} dimensions"
        s = hstack([c for _, c in pieces], self.tag.field, self.n)
        return form, make_witness(self.a, self.f, s, form)


def make_witness(a: Matrix, f: Matrix, s: Matrix, form: CanonicalForm):
    a_can, f_can = block_matrices(form)
    similarity = norm(solve(s, a @ s) - a_can)
    congruence = norm(st_transpose(s, form.tag.involution) @ f @ s - f_can)
    return TransformWitness(s, relative(similarity, norm(a)), relative(congruence, norm(f)))


def canonicalize(pair: MatrixPair) -> tuple[CanonicalForm, TransformWitness]:
    canonicalizer = _Canonicalizer(pair)
    canonicalizer.run()
    form, witness = canonicalizer.result()
    log.debug(
        f"Canonical form {pair.tag}: {len(form.blocks)} blocks, residuals"
        f" {witness.residual_similarity:.2e} / {witness.residual_congruence:.2e}"
    )
    if witness.residual > pair.tolerances.tol_witness:
        raise WitnessError(
            f"Transformation residual {witness.residual:.3g} exceeds"
            f" {pair.tolerances.tol_witness:g}"
        )
    return form, witness


def block_isomorphism(block: CanonicalBlock, tag: CaseTag) -> Matrix:
    """S with (S^-1 A S, S^st F S) = (A, -F) for the block pair (A, F), where one exists.

    These are the sign absorptions of the catalog: (x^R, Z) in b1 with x^r = x, (x, +j) in c2
    and c3, (1 or -1, +-1) in c2 and (1 or -1, +-i) in c3.
    """
    case, x = tag.case, block.index
    signs = (FormScalar.plus_one, FormScalar.minus_one)
    imaginary = (FormScalar.plus_i, FormScalar.minus_i)
    if block.kind is BlockKind.two:
        if case is Case.b1 and block.realified and block.rule is PartnerRule.pow_r:
            return np.array([[0.0, -1.0], [1.0, 0.0]])
    elif block.scalar is FormScalar.plus_j and case in (Case.c2, Case.c3):
        return QMatrix.from_entries([[I]])
    elif x.is_real and case is Case.c2 and block.scalar in signs:
        return QMatrix.from_entries([[J]])
    elif x.is_real and case is Case.c3 and block.scalar in imaginary:
        return QMatrix.from_entries([[J]])
    raise NormalizeError(f"Block {describe(block, tag)} is not congruent to its negative")
