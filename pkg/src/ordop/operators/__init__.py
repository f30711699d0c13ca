"""Operators on C([0, W]) in symbolic form."""
