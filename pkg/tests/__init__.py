"""Test suite for arw_fixation package."""
