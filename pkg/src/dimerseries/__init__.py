"""Exact matching counts, dimer entropy series and high-j kernel checks."""
