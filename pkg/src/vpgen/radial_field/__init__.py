"""Spherically symmetric Poisson field of particle configurations.

Contains:
- Enclosed mass, force, density and potential on a radial grid
- Field estimates checked along runs
- Potentials vanishing at infinity and their uniqueness conditions
"""
