"""CLI interface for csdlab."""

__all__ = []
