"""Rational points on genus-2 curves: local solvability, Jacobian arithmetic,
Chabauty and the Mordell-Weil sieve."""

__version__ = "0.1.0"
