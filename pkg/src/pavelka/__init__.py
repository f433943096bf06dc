"""Proof checking and degrees of truth for Łukasiewicz, Rational Pavelka and
Graded Rational Pavelka logic."""

__version__ = "0.1.0"
