"""Bundled fixture circuits in AIGER ASCII format."""
