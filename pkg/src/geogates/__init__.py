"""Geometric quantum gates from designable Bloch-sphere trajectories."""
