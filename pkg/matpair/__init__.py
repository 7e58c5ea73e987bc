"""Canonical forms of r-selfadjoint matrix pairs.

A pair (A, F) of a linear operator and a nondegenerate symmetric, skew-symmetric, Hermitian or
skew-Hermitian form with A^st F = F A^r is classified up to (S^-1 A S, S^st F S) over the real
numbers, the complex numbers and the quaternions.
"""

__version__ = "1.0.0"
