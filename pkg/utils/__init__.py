"""Terminal display helpers for the CLI."""
