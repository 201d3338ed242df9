"""Tests for the supercritical stabilization loop."""
