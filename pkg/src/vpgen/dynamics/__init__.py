"""Leapfrog integration of the radial characteristic system with tangent tracking."""
