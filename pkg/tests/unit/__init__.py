"""Unit tests for csdlab."""
