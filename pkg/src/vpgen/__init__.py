"""Vlasov-Poisson simulations with mollified singular initial data.

Provides regularization scales and mollified particle data, the spherically
symmetric Poisson field, a leapfrog particle integrator with tangent
tracking, asymptotic sweeps and stability experiments, singular-limit
oracles, and the `vpgen` experiment harness.
"""
