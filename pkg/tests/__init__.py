"""
Tests for the dsim estimator.
"""
