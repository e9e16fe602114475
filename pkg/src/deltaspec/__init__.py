"""Commit-relevant specification inference for DL classes."""

__version__ = "0.1.0"
