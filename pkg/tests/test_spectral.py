import cmath
import math

import numpy as np
import pytest

from matpair.scalars import ContextError, QMatrix, realify
from matpair.spectral import Case, CaseTag, EigIndex, NotDiagonalizableError, SnapError
from matpair.spectral import admissible, all_indices, eigenbasis, idx_conj, idx_pow_r, modulus
from matpair.spectral import orbit, pairing_image, self_paired, snap_spectrum, snap_value
from matpair.spectral import projector, standardize
from matpair.settings import settings

from .config import exponents


def omega(k: int, m: int):
    return cmath.exp(2j * math.pi * k / m)


def test_modulus():
    assert modulus(2) == 3 and modulus(-3) == 8 and modulus(64) == 4095
    with pytest.raises(ContextError):
        modulus(1)
    with pytest.raises(ContextError):
        modulus(65)


def test_index_values():
    assert EigIndex.root(2, 8).value == 1j
    assert EigIndex.root(4, 8).value == -1
    assert EigIndex.root(11, 8) == EigIndex(3, 8)
    assert EigIndex.zero(3).value == 0 and EigIndex.zero(3).is_real
    assert EigIndex.root(4, 8).is_real and not EigIndex.root(1, 3).is_real


@pytest.mark.parametrize("r", exponents)
def test_index_power_matches_values(r):
    m = modulus(r)
    for x in all_indices(r):
        if not x.is_zero:
            assert idx_pow_r(x, r).value == pytest.approx(x.value**r)
            assert idx_conj(x).value == pytest.approx(x.value.conjugate())
            assert idx_pow_r(idx_pow_r(x, r), r) == x  # x^(r^2) = x
    assert len(all_indices(r)) == m + (1 if r > 0 else 0)


def test_admissible():
    assert admissible(EigIndex.zero(3), 2)
    assert not admissible(EigIndex.zero(3), -2)
    assert not admissible(EigIndex.root(1, 8), 2)


def test_standardize():
    assert standardize(EigIndex.root(6, 8)) == EigIndex(2, 8)
    assert standardize(EigIndex.root(2, 8)) == EigIndex(2, 8)


def test_pairing():
    a1 = CaseTag(Case.a1, 2)
    assert pairing_image(EigIndex(1, 3), a1) == EigIndex(2, 3)
    a2 = CaseTag(Case.a2, 2)
    assert all(self_paired(x, a2) for x in all_indices(2))
    # c2, r=3: i^3 = -i, the conjugate, so i is paired with itself
    c2 = CaseTag(Case.c2, 3)
    assert self_paired(EigIndex(2, 8), c2)
    assert pairing_image(EigIndex(1, 8), c2) == EigIndex(3, 8)


def test_orbit():
    b1 = CaseTag(Case.b1, 3)
    assert orbit(EigIndex(1, 8), b1) == [EigIndex(k, 8) for k in (1, 3, 5, 7)]
    a1 = CaseTag(Case.a1, 3)
    assert orbit(EigIndex(1, 8), a1) == [EigIndex(1, 8), EigIndex(3, 8)]


def test_snap_value():
    assert snap_value(omega(1, 3) + 1e-9, 2, 1e-6) == EigIndex(1, 3)
    assert snap_value(1e-8, 3, 1e-6) == EigIndex.zero(8)
    with pytest.raises(SnapError):
        snap_value(1e-8, -3, 1e-6)
    with pytest.raises(SnapError):
        snap_value(0.5, 2, 1e-6)
    with pytest.raises(SnapError):
        snap_value(-1.0, 2, 1e-6)  # -1 is not a cube root of unity


def test_snap_spectrum_multiplicities(rng):
    s = rng.standard_normal((4, 4))
    a = np.linalg.solve(s, np.diag([1.0, 1.0, 0.0, -1.0]) @ s)
    report = snap_spectrum(a, 3)
    assert report.entries == [(EigIndex.zero(8), 1), (EigIndex(0, 8), 2), (EigIndex(4, 8), 1)]
    assert report.total == 4


def test_snap_spectrum_rejects_jordan_block():
    with pytest.raises(NotDiagonalizableError):
        snap_spectrum(np.array([[1.0, 1.0], [0.0, 1.0]]), 2)


def test_snap_spectrum_real_rotation():
    report = snap_spectrum(realify(omega(1, 3)), 2)
    assert report.entries == [(EigIndex(1, 3), 1), (EigIndex(2, 3), 1)]


def test_snap_spectrum_quaternion():
    a = QMatrix(np.diag([1j, 1.0, 1.0]))
    report = snap_spectrum(a, 3)
    assert report.quaternion
    assert report.entries == [(EigIndex(0, 8), 2), (EigIndex(2, 8), 1)]


def test_projectors(rng):
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    s = q @ np.diag([1.0, 2.0, 1.0, 3.0])
    a = np.linalg.solve(s, np.diag([omega(1, 3), omega(1, 3), 1.0, 0.0]) @ s)
    report = snap_spectrum(a, 2)
    p = {x: projector(a, x, report.observed) for x in report.indices}
    bound = 10 * settings.tol_snap
    for x, px in p.items():
        assert np.linalg.norm(px @ px - px) < bound
        assert np.linalg.matrix_rank(px, tol=1e-6) == report.multiplicity(x)
        for y, py in p.items():
            if y != x:
                assert np.linalg.norm(px @ py) < bound, f"{x} vs {y}"


def test_eigenbasis_complex(rng):
    s = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    w = omega(1, 3)
    a = np.linalg.solve(s, np.diag([w, w, 1.0]) @ s)
    report = snap_spectrum(a, 2)
    b = eigenbasis(a, EigIndex(1, 3), report)
    assert b.shape == (3, 2)
    np.testing.assert_allclose(a @ b, b * w, atol=1e-9)
    assert np.linalg.matrix_rank(b) == 2


def test_eigenbasis_quaternion(rng):
    z1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    z2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    s = QMatrix(z1, z2)
    a = s.inv() @ QMatrix(np.diag([1.0, 1.0, 1j])) @ s
    report = snap_spectrum(a, 3)
    real = eigenbasis(a, EigIndex(0, 8), report)
    assert real.shape == (3, 2)
    assert (a @ real - real).norm() < 1e-8
    # right H-independence: the complex embedding has full rank 4
    assert np.linalg.matrix_rank(real.embed()) == 4
    imaginary = eigenbasis(a, EigIndex(2, 8), report)
    assert (a @ imaginary - imaginary * 1j).norm() < 1e-8
