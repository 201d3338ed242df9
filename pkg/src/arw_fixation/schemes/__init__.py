"""Constructive stabilization schemes for both regimes."""
