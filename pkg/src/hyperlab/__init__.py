"""Numerical laboratory for invariant distances and quasi-isometries of convex domains."""
