"""Supervised learning benchmarks on labeled mathematical data."""

__version__ = "0.1.0"
