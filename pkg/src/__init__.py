"""Core package for serendipity finite elements and patch-based preconditioners."""
