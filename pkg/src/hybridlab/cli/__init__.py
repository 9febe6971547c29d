"""Command line front end: scenario catalog, configs, and artifact output."""

from hybridlab.cli.main import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main

__all__ = ["EXIT_NUMERICAL", "EXIT_OK", "EXIT_VALIDATION", "main"]
