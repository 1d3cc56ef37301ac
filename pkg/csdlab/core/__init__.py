"""Channels, errors, configuration and records."""
