"""Nonlocal trace-expansion coefficients for exactly representable classical symbols."""
