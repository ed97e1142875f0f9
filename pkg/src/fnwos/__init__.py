"""Fractional walk-on-spheres solvers."""
