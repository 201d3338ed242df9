"""Tests for the subcritical gather-and-trap scheme."""
