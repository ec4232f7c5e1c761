"""Study scripts."""
