"""
Core package.

Model description, constraints, estimation, fit statistics, scaling,
interpretation and auditing.
"""
