"""Local conformal-to-Kahler detection for four-dimensional metrics."""

__version__ = "0.1.0"
