"""Cauchy-Bunyakovsky-Schwarz inequalities and strengthened CBS constants."""

__version__ = "0.1.0"
