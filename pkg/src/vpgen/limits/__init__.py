"""Singular-limit oracles and convergence of regularized runs toward them.

Contains:
- Radial shell n-body oracle
- Pressureless Euler-Poisson oracle before shell crossing
- Mass-quantile observables and their sup errors across widths
"""
