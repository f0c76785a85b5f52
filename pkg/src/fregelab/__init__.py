"""Restrictions, expander closures and proof regularization for bounded-depth Frege."""

__version__ = "0.1.0"
