"""Tests for the toppling engine."""
