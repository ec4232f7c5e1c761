"""Command-line surface and scenario files."""
