"""Experiment handlers, one per CLI subcommand.

Contains:
- Run, sweep, stability and limit experiments
- Poisson solver and scale membership checks
- Report aggregation of existing outputs
"""
