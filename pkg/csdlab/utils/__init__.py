"""Utility helpers for csdlab."""

from csdlab.utils.parallel import parallel_map, worker_count

__all__ = ['parallel_map', 'worker_count']
