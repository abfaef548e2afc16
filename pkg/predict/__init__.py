"""Theoretical predictions: spike predictor, Euler products, ratios-conjecture densities and limit kernels."""
