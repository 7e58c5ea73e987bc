import cmath
import math

import numpy as np
import pytest

from matpair.scalars import Field, Involution, QMatrix, realify
from matpair.spectral import Case, CaseTag, EigIndex, pow_conjugates
from matpair.canon import BlockKind, CanonicalBlock, FormScalar, PartnerRule
from matpair.canon import block_matrices, orbit_rep
from matpair.spectral import orbit
from matpair.instance import AdmissibilityError, ContextMismatch, GeneratorSpec, MatrixPair
from matpair.instance import Operator, ValidationError, catalog, corrupt, equivalent
from matpair.instance import index_of_eigenvalue, random_instance, require_valid, resolve_block
from matpair.instance import sample_blocks, scramble, validate_pair

from .config import all_cases, exponents

w3 = cmath.exp(2j * math.pi / 3)


def complex_pair(a, f, involution=Involution.conj, epsilon=1, r=3):
    return MatrixPair(np.atleast_2d(a), np.atleast_2d(f), Field.C, involution, epsilon, r)


def test_validate_trivial():
    report = validate_pair(complex_pair([[1]], [[1]]))
    assert report.passed
    assert all(c.residual == 0 for c in report.checks if c.name != "F nonsingular")
    assert report.get("A^(r^2) = A").derived


def test_validate_hyperbolic():
    pair = complex_pair(np.diag([w3, w3 * w3]), [[0, 1], [1, 0]], Involution.identity, r=2)
    assert validate_pair(pair).passed


def test_validate_relation_failure():
    report = validate_pair(complex_pair([[2]], [[1]], Involution.identity, r=2))
    assert not report.passed
    relation = report.get("relation")
    assert relation and not relation.passed
    assert relation.residual == pytest.approx(0.5)


def test_validate_singular_form():
    report = validate_pair(complex_pair([[1]], [[0]]))
    assert not report.passed and report.failures[0].message == "F singular"


def test_validate_singular_operator_negative_exponent():
    report = validate_pair(complex_pair(np.zeros((1, 1)), [[1]], r=-2))
    assert [c.name for c in report.failures] == ["A nonsingular"]


def test_validate_symmetry_and_shape():
    report = validate_pair(complex_pair([[1, 0], [0, 1]], [[1, 1], [0, 1]]))
    assert report.get("symmetry") and not report.get("symmetry").passed
    report = validate_pair(complex_pair([[1, 0], [0, 1]], [[1]]))
    assert [c.name for c in report.checks] == ["shape"]


def test_validate_unsupported_context():
    report = validate_pair(complex_pair([[1]], [[1j]], epsilon=-1))
    assert report.get("context") and not report.get("context").passed


def test_require_valid():
    with pytest.raises(ValidationError, match="relation"):
        require_valid(complex_pair([[2]], [[1]], Involution.identity, r=2))


def test_unitary_pair():
    # F(Au, A^3 v) = F(u, v) for A = -1, stored as a (-3)-selfadjoint pair
    pair = MatrixPair.from_unitary(
        np.array([[-1.0]]), np.array([[1.0]]), Field.C, Involution.conj, 1, 3
    )
    assert pair.r == -3 and pair.operator is Operator.unitary
    report = validate_pair(pair)
    assert report.passed and report.get("unitary")


def test_catalog_counts():
    assert len(catalog(CaseTag(Case.a1, 2))) == 3
    a2 = catalog(CaseTag(Case.a2, 2))
    assert len(a2) == 8 and all(b.kind is BlockKind.one for b in a2)
    one_indices = {b.index.k for b in catalog(CaseTag(Case.a2, 3)) if b.kind is BlockKind.one}
    assert one_indices == {None, 0, 2, 4, 6}


def test_catalog_parity():
    minus_one = EigIndex(4, 8)
    b1_odd = catalog(CaseTag(Case.b1, 3))
    assert CanonicalBlock.one(minus_one, FormScalar.plus_one) in b1_odd
    assert CanonicalBlock.one(minus_one, FormScalar.minus_one) in b1_odd
    b1_even = catalog(CaseTag(Case.b1, 2))
    assert not any(b.index.is_real and b.index.k not in (None, 0) for b in b1_even)


def test_catalog_skew():
    assert all(b.kind is BlockKind.two for b in catalog(CaseTag(Case.a3, 2)))
    c4 = catalog(CaseTag(Case.c4, 3))
    ones = [b for b in c4 if b.kind is BlockKind.one]
    assert {b.scalar for b in ones} == {FormScalar.plus_i, FormScalar.minus_i}
    assert {b.index.k for b in ones} == {None, 0, 2, 4}


@pytest.mark.parametrize("case", all_cases)
@pytest.mark.parametrize("r", exponents)
def test_catalog_closed_under_orbits(case, r):
    tag = CaseTag(case, r)
    templates = catalog(tag)
    keys = {(b.kind, b.index) for b in templates}
    for b in templates:
        for x in orbit(b.index, tag):
            if b.kind is BlockKind.two and case is not Case.b2:
                assert (b.kind, orbit_rep(x, tag)) in keys
            elif b.kind is BlockKind.one:
                # conjugate copies of self-paired indices name the same block
                assert (b.kind, orbit_rep(x, tag)) in keys


def test_resolve_block():
    tag = CaseTag(Case.a1, 2)
    block = resolve_block(BlockKind.two, EigIndex(2, 3), tag)
    assert block == CanonicalBlock.two(EigIndex(1, 3), PartnerRule.pow_r, 1)
    with pytest.raises(AdmissibilityError):
        resolve_block(BlockKind.one, EigIndex(1, 3), tag)
    with pytest.raises(AdmissibilityError):
        index_of_eigenvalue(-1.0, CaseTag(Case.b1, 2))
    assert index_of_eigenvalue(-1.0, CaseTag(Case.b1, 3)) == EigIndex(4, 8)


def test_sample_blocks(rng):
    tag = CaseTag(Case.b2, 3)
    for dim in (2, 4, 6, 8):
        blocks = sample_blocks(tag, dim, rng)
        assert sum(b.size for b in blocks) == dim
    with pytest.raises(AdmissibilityError):
        sample_blocks(tag, 3, rng)
    with pytest.raises(AdmissibilityError):
        sample_blocks(CaseTag(Case.a3, 2), 5, rng)


def test_random_instance_explicit_blocks():
    tag = CaseTag(Case.a2, 2)
    block = CanonicalBlock.one(EigIndex(0, 3), FormScalar.plus_one)
    pair, truth, witness = random_instance(GeneratorSpec(tag, [block], seed=5))
    assert pair.n == 1 and truth.blocks == (block,)
    assert pair.A[0, 0] == pytest.approx(1)
    assert pair.F[0, 0].real > 0 and abs(pair.F[0, 0].imag) < 1e-12


def test_random_instance_skew_real():
    tag = CaseTag(Case.b2, 3)
    zero = CanonicalBlock.two(EigIndex.zero(8), PartnerRule.pow_r, -1)
    pair, truth, _ = random_instance(GeneratorSpec(tag, [zero], seed=1))
    assert pair.A.shape == (2, 2) and pair.A.dtype == float
    np.testing.assert_allclose(pair.F, -pair.F.T, atol=1e-12)
    assert validate_pair(pair).passed


def test_random_instance_inadmissible():
    tag = CaseTag(Case.a1, 2)
    bad = CanonicalBlock.one(EigIndex(1, 3), FormScalar.plus_one)
    with pytest.raises(AdmissibilityError):
        random_instance(GeneratorSpec(tag, [bad], seed=0))


@pytest.mark.parametrize("case", all_cases)
def test_random_instance_witness(case):
    tag = CaseTag(case, 3)
    pair, truth, witness = random_instance(GeneratorSpec(tag, dim=4, seed=11))
    a, f = block_matrices(truth)
    back = pair.transformed(witness)
    if isinstance(a, QMatrix):
        assert (back.A - a).norm() < 1e-9 and (back.F - f).norm() < 1e-9
    else:
        np.testing.assert_allclose(back.A, a, atol=1e-9)
        np.testing.assert_allclose(back.F, f, atol=1e-9)
    assert validate_pair(pair).passed


def test_random_instance_reproducible():
    spec = GeneratorSpec(CaseTag(Case.c3, -3), dim=6, seed=7)
    first, second = random_instance(spec), random_instance(spec)
    assert first.truth == second.truth
    assert (first.pair.A - second.pair.A).norm() == 0


def test_corrupt_breaks_relation(rng):
    pair, _, _ = random_instance(GeneratorSpec(CaseTag(Case.b1, 3), dim=4, seed=3))
    assert not validate_pair(corrupt(pair, 1e-3, rng)).passed


def a2_pair(signs):
    n = len(signs)
    return complex_pair(np.eye(n), np.diag(signs).astype(complex))


def test_equivalent_permutation():
    assert equivalent(a2_pair([1, -1]), a2_pair([-1, 1]))
    assert not equivalent(a2_pair([1, -1]), a2_pair([1, 1]))


def test_equivalent_context_mismatch():
    real = MatrixPair(np.eye(1), np.eye(1), Field.R, Involution.identity, 1, 3)
    with pytest.raises(ContextMismatch):
        equivalent(a2_pair([1]), real)


def quaternion_pair(case: Case, a, f):
    return MatrixPair(QMatrix([[a]]), QMatrix([[f]]), Field.H, case.involution, case.epsilon, 3)


def test_quaternion_rigidity():
    c1 = quaternion_pair(Case.c1, 1j, 1.0), quaternion_pair(Case.c1, 1j, -1.0)
    assert not equivalent(*c1)
    c2_real = quaternion_pair(Case.c2, 1.0, 1.0), quaternion_pair(Case.c2, 1.0, -1.0)
    assert equivalent(*c2_real)
    c2 = quaternion_pair(Case.c2, 1j, 1.0), quaternion_pair(Case.c2, 1j, -1.0)
    assert not equivalent(*c2)


def real_pair(a, f, r):
    return MatrixPair(a, f, Field.R, Involution.identity, 1, r)


def test_real_rigidity():
    mu = EigIndex(1, 3)
    assert pow_conjugates(mu, 2)
    a = realify(mu.value)
    assert not equivalent(real_pair(a, np.eye(2), 2), real_pair(a, -np.eye(2), 2))
    # w3^-2 = w3: the block (w3^R, Z) absorbs the sign of Z
    z = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert equivalent(real_pair(a, z, -2), real_pair(a, -z, -2))


@pytest.mark.parametrize("case", all_cases)
def test_equivalent_to_scramble(case, rng):
    dim = 4 if case in (Case.a3, Case.b2) else 5
    pair, _, _ = random_instance(GeneratorSpec(CaseTag(case, -3), dim=dim, seed=2))
    other = scramble(pair, rng)
    assert equivalent(pair, other) and equivalent(other, pair)
    assert equivalent(pair, pair)


def test_equivalent_dimension_mismatch():
    assert not equivalent(a2_pair([1]), a2_pair([1, 1]))
