"""Computational reflection functors, finite categories and homotopy checks."""

__version__ = "0.1.0"
FORMAT_VERSION = "reflekt/1"
