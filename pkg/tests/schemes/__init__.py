"""Tests for the stabilization schemes."""
