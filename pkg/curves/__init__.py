"""Elliptic curve models, point counting and a(p) tables."""
