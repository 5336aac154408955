"""Synthetic benchmark suite."""
