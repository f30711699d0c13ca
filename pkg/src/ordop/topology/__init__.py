"""Step functions, ordinal maps, sequences and closed sets on [0, W]."""
