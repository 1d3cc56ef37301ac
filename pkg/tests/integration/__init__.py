"""Command-line integration tests for csdlab."""
