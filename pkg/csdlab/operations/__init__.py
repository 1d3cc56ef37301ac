"""Numerical operations: divergences, block laws, sampling and tilting."""
