"""Regularization scales, mollifier kernels and mollified particle data."""
