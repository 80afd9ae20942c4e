"""Exact and asymptotic multiple orthogonal polynomials for a two-interval Nikishin system."""
