from __future__ import annotations
import dataclasses
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .scalars import ContextError, Field, Involution, Matrix, QMatrix
from .scalars import complex_view, cond, inverse, norm, power, solve, st_transpose
from .spectral import CaseTag, EigIndex, SnapError, admissible, all_indices, idx_conj
from .spectral import modulus, pow_conjugates, pow_fixes, snap_value, standardize
from .canon import BlockKind, CanonicalBlock, CanonicalForm, FormScalar, PartnerRule
from .canon import block_matrices, canonicalize, classify_case, orbit_rep
from .settings import Tolerances, settings
from .util import MatpairError, logger as log, relative


class AdmissibilityError(MatpairError):
    pass


class ContextMismatch(ContextError):
    pass


class ValidationError(MatpairError):
    pass


class Operator(Enum):
    selfadjoint = "selfadjoint"
    unitary = "unitary"


@dataclass
class MatrixPair:
    """Operator A and form F on H^n, C^n or R^n with A^st F = F A^r.

    For r-unitary operators (F(Au, A^r v) = F(u, v)) the stored exponent is -r.
    """

    A: Matrix
    F: Matrix
    field: Field
    involution: Involution
    epsilon: int
    r: int
    tolerances: Tolerances = dataclasses.field(default_factory=lambda: settings.tolerances())
    operator: Operator = Operator.selfadjoint

    def __post_init__(self):
        self.A = _coerce(self.A, self.field)
        self.F = _coerce(self.F, self.field)

    @staticmethod
    def from_unitary(
        a: Matrix, f: Matrix, field: Field, involution: Involution, epsilon: int, r: int, **kwargs
    ):
        return MatrixPair(a, f, field, involution, epsilon, -r, operator=Operator.unitary, **kwargs)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def case(self):
        return classify_case(self.field, self.involution, self.epsilon)

    @property
    def tag(self):
        return CaseTag(self.case, self.r)

    @property
    def context(self):
        return (self.field, self.involution, self.epsilon, self.r)

    def transformed(self, s: Matrix):
        """The pair (S^-1 A S, S^st F S)."""
        a = solve(s, self.A @ s)
        f = st_transpose(s, self.involution) @ self.F @ s
        return dataclasses.replace(self, A=a, F=f)


def _coerce(m, field: Field) -> Matrix:
    if field is Field.H:
        return QMatrix.of(m)
    if isinstance(m, QMatrix):
        raise ContextError(f"Quaternion matrix given for a pair over {field.value}")
    m = np.asarray(m)
    if field is Field.C:
        return m.astype(complex)
    if np.iscomplexobj(m):
        if np.any(np.imag(m) != 0):
            raise ContextError("Complex entries in a pair over R")
        m = m.real
    return m.astype(float)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float = 0.0
    derived: bool = False
    message: str = ""


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def get(self, name: str):
        return next((c for c in self.checks if c.name == name), None)

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "ok" if c.passed else "FAILED"
            derived = " (derived)" if c.derived else ""
            message = f" - {c.message}" if c.message and not c.passed else ""
            lines.append(f"{c.name}{derived}: {status}, residual {c.residual:.3g}{message}")
        return "\n".join(lines)


def _shape_check(pair: MatrixPair):
    a, f = pair.A, pair.F
    if isinstance(a, np.ndarray) and (a.ndim != 2 or np.ndim(f) != 2):
        return Check("shape", False, message="A and F must be matrices")
    if a.shape[0] != a.shape[1] or f.shape != a.shape:
        message = f"A {a.shape} and F {f.shape} are not square of equal size"
        return Check("shape", False, message=message)
    if a.shape[0] == 0:
        return Check("shape", False, message="Empty matrices")
    return Check("shape", True)


def validate_pair(pair: MatrixPair) -> ValidationReport:
    """Check every defining property of the pair, failures are reported, not raised."""
    checks = [_shape_check(pair)]
    if not checks[0].passed:
        return ValidationReport(checks)
    try:
        _ = pair.case
        modulus(pair.r)
        checks.append(Check("context", True))
    except ContextError as e:
        checks.append(Check("context", False, message=str(e)))
        return ValidationReport(checks)

    tol = pair.tolerances
    a, f, r = pair.A, pair.F, pair.r

    def st(m: Matrix):
        return st_transpose(m, pair.involution)

    s = np.linalg.svd(complex_view(f), compute_uv=False)
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    checks.append(Check("F nonsingular", ratio > tol.eps_rank, ratio, message="F singular"))
    if ratio <= tol.eps_rank:
        return ValidationReport(checks)

    symmetry = relative(norm(st(f) - pair.epsilon * f), norm(f))
    checks.append(
        Check(
            "symmetry",
            symmetry <= tol.tol_relation,
            symmetry,
            message=f"F^st != {pair.epsilon:+d} F",
        )
    )

    if r < 0:
        s = np.linalg.svd(complex_view(a), compute_uv=False)
        ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
        nonsingular = ratio > tol.eps_rank
        checks.append(Check("A nonsingular", nonsingular, ratio, message="A singular"))
        if not nonsingular:
            return ValidationReport(checks)

    with np.errstate(over="ignore", invalid="ignore"):
        growth = max(1.0, norm(a)) ** abs(r)
        residual = relative(norm(st(a) @ f - f @ power(a, r)), norm(f) * growth)
        checks.append(
            Check("relation", residual <= tol.tol_relation, residual, message="A^st F != F A^r")
        )
        if pair.operator is Operator.unitary:
            residual = relative(norm(st(a) @ f @ power(a, -r) - f), norm(f) * growth * norm(a))
            checks.append(
                Check("unitary", residual <= tol.tol_relation, residual, message="A^st F A^r != F")
            )
        residual = relative(norm(power(a, r * r) - a), norm(a))
        residual = float(residual) if np.isfinite(residual) else float("inf")
        checks.append(
            Check(
                "A^(r^2) = A",
                residual <= tol.tol_derived,
                residual,
                derived=True,
                message="A^(r^2) != A",
            )
        )
    report = ValidationReport(checks)
    if not report.passed:
        log.warning(f"Validation failed: {', '.join(c.name for c in report.failures)}")
    return report


def require_valid(pair: MatrixPair):
    report = validate_pair(pair)
    if not report.passed:
        failed = "; ".join(f"{c.name}: {c.message}" for c in report.failures)
        raise ValidationError(f"Pair is not valid ({failed})")
    return report


def _templates(x: EigIndex, tag: CaseTag) -> list[CanonicalBlock]:
    case, r = tag.case.name, tag.r
    one, two = CanonicalBlock.one, CanonicalBlock.two
    pw, cpw = PartnerRule.pow_r, PartnerRule.conj_pow_r
    fixes, conjugates = pow_fixes(x, r), pow_conjugates(x, r)
    signs = [FormScalar.plus_one, FormScalar.minus_one]
    imaginary = [FormScalar.plus_i, FormScalar.minus_i]

    if case == "a1":
        return [one(x, FormScalar.plus_one)] if fixes else [two(x, pw, 1)]
    if case == "a2":
        return [one(x, s) for s in signs] if conjugates else [two(x, cpw, 1)]
    if case == "a3":
        return [two(x, pw, -1)]
    if case == "b1":
        if x.is_real:
            return [one(x, s) for s in signs]
        if fixes:
            return [two(x, pw, 1, realified=True)]
        if conjugates:
            return [one(x, s, realified=True) for s in signs]
        return [two(x, cpw, 1, realified=True)]
    if case == "b2":
        if x.is_real:
            return [two(x, pw, -1)]
        if conjugates:
            return [two(x, pw, -1, realified=True), two(idx_conj(x), pw, -1, realified=True)]
        return [two(x, cpw, -1, realified=True)]
    if case == "c1":
        return [one(x, s) for s in signs] if conjugates else [two(x, cpw, 1)]
    if case == "c4":
        return [one(x, s) for s in imaginary] if conjugates else [two(x, cpw, -1)]
    # c2 and c3 differ in the scalars of self-paired blocks only
    if x.is_real:
        return [one(x, FormScalar.plus_one if case == "c2" else FormScalar.plus_i)]
    if conjugates:
        return [one(x, s) for s in (signs if case == "c2" else imaginary)]
    if fixes:
        return [one(x, FormScalar.plus_j)]
    return [two(x, cpw, tag.epsilon)]


@lru_cache(maxsize=64)
def catalog(tag: CaseTag) -> tuple[CanonicalBlock, ...]:
    """All block templates of the case: one entry per orbit representative and form scalar."""
    indices = all_indices(tag.r)
    if tag.field is Field.H:
        indices = [x for x in indices if standardize(x) == x]
    result: list[CanonicalBlock] = []
    for x in indices:
        if orbit_rep(x, tag) == x:
            result.extend(_templates(x, tag))
    return tuple(result)


def resolve_block(
    kind: BlockKind, x: EigIndex, tag: CaseTag, scalar: FormScalar | None = None
) -> CanonicalBlock:
    """Catalog template for a requested block, Two block indices are reduced to their orbit."""
    if not admissible(x, tag.r):
        raise AdmissibilityError(f"Index {x} is not an admissible eigenvalue for r={tag.r}")
    if tag.field is Field.H:
        x = standardize(x)
    templates = [b for b in catalog(tag) if b.kind is kind]
    matches = [b for b in templates if b.index == x]
    if not matches and kind is BlockKind.two:
        matches = [b for b in templates if b.index == orbit_rep(x, tag)]
    if scalar is not None:
        matches = [b for b in matches if b.scalar is scalar]
    if not matches:
        scalar_text = f" with scalar {scalar.value}" if scalar else ""
        raise AdmissibilityError(
            f"Case {tag} has no {kind.value} block at index {x}{scalar_text}"
        )
    return matches[0]


def index_of_eigenvalue(z: complex, tag: CaseTag, tol: float | None = None):
    try:
        return snap_value(complex(z), tag.r, settings.tol_snap if tol is None else tol)
    except SnapError as e:
        raise AdmissibilityError(str(e)) from e


def check_admissible(blocks: Sequence[CanonicalBlock], tag: CaseTag):
    templates = set(catalog(tag))
    for b in blocks:
        if b not in templates:
            raise AdmissibilityError(f"Block {b} is not in the catalog of case {tag}")


def sample_blocks(tag: CaseTag, dim: int, rng: np.random.Generator):
    """Random blocks from the catalog with sizes adding up to dim exactly."""
    templates = catalog(tag)
    sizes = sorted({b.size for b in templates})
    feasible = [True] + [False] * max(dim, 0)
    for d in range(1, dim + 1):
        feasible[d] = any(s <= d and feasible[d - s] for s in sizes)
    if dim < 1 or not feasible[dim]:
        raise AdmissibilityError(f"Dimension {dim} cannot be filled with blocks of case {tag}")

    blocks = []
    remaining = dim
    while remaining > 0:
        choices = [b for b in templates if b.size <= remaining and feasible[remaining - b.size]]
        block = choices[int(rng.integers(len(choices)))]
        blocks.append(block)
        remaining -= block.size
    return blocks


def random_matrix(field: Field, n: int, rng: np.random.Generator) -> Matrix:
    if field is Field.R:
        return rng.standard_normal((n, n))
    if field is Field.C:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return QMatrix(z1, z2)


def random_transform(
    field: Field, n: int, rng: np.random.Generator, cond_bound: float | None = None
) -> Matrix:
    cond_bound = settings.cond_bound if cond_bound is None else cond_bound
    for _ in range(settings.scramble_attempts):
        s = random_matrix(field, n, rng)
        c = cond(s)
        if c <= cond_bound:
            return s
        log.debug(f"Rejected random transformation with condition number {c:.1f}")
    raise AdmissibilityError(
        f"No {n}x{n} transformation with condition number below {cond_bound} found in"
        f" {settings.scramble_attempts} attempts"
    )


@dataclass
class GeneratorSpec:
    tag: CaseTag
    blocks: list[CanonicalBlock] | None = None
    dim: int | None = None
    seed: int | None = None
    cond_bound: float = dataclasses.field(default_factory=lambda: settings.cond_bound)


class GeneratedInstance(NamedTuple):
    pair: MatrixPair
    truth: CanonicalForm
    witness: Matrix  # S^-1 A S and S^st F S give back the canonical matrices


def random_instance(spec: GeneratorSpec, rng: np.random.Generator | None = None):
    tag = spec.tag
    rng = rng or np.random.default_rng(spec.seed)
    if spec.blocks is not None:
        blocks = list(spec.blocks)
        check_admissible(blocks, tag)
    elif spec.dim is not None:
        blocks = sample_blocks(tag, spec.dim, rng)
    else:
        raise AdmissibilityError("Generator needs explicit blocks or a dimension")

    truth = CanonicalForm.create(tag, blocks)
    a, f = block_matrices(truth)
    canonical = MatrixPair(a, f, tag.field, tag.involution, tag.epsilon, tag.r)
    s = random_transform(tag.field, truth.size, rng, spec.cond_bound)
    log.debug(f"Generated {truth.size}x{truth.size} pair for {tag}, {len(blocks)} blocks")
    return GeneratedInstance(canonical.transformed(s), truth, inverse(s))


def scramble(pair: MatrixPair, rng: np.random.Generator, cond_bound: float | None = None):
    return pair.transformed(random_transform(pair.field, pair.n, rng, cond_bound))


def corrupt(pair: MatrixPair, magnitude: float, rng: np.random.Generator):
    """Copy of the pair with one entry of A moved by magnitude."""
    i, j = (int(v) for v in rng.integers(pair.n, size=2))
    if isinstance(pair.A, QMatrix):
        a = pair.A.copy()
        a.z1[i, j] += magnitude
    else:
        a = pair.A.copy()
        a[i, j] += magnitude
    return dataclasses.replace(pair, A=a)


def check_same_context(p1: MatrixPair, p2: MatrixPair):
    if p1.context != p2.context:
        c1, c2 = (f"{p.field.value}/{p.involution.value}/{p.epsilon:+d}/r={p.r}" for p in (p1, p2))
        raise ContextMismatch(f"Pairs have different contexts: {c1} vs {c2}")


def canonical_forms(p1: MatrixPair, p2: MatrixPair):
    check_same_context(p1, p2)
    require_valid(p1)
    require_valid(p2)
    return canonicalize(p1)[0], canonicalize(p2)[0]


def equivalent(p1: MatrixPair, p2: MatrixPair) -> bool:
    """Whether some S gives (S^-1 A1 S, S^st F1 S) = (A2, F2), decided by canonical forms."""
    check_same_context(p1, p2)
    if p1.n != p2.n:
        return False
    f1, f2 = canonical_forms(p1, p2)
    return f1 == f2
