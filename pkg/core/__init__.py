"""Analytic engine: special functions, zeta and L-function evaluation, zero finding and statistics."""
