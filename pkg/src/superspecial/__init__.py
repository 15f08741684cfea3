"""Superspecial reduction of QM abelian surfaces: Heegner polynomials on the
discriminant-6 Shimura curve and a certified search for supersingular primes."""

__version__ = "0.1.0"
