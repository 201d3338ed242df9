"""Exports to external formats."""
