"""Core library: array model, trajectories, phase design, near-field synthesis and metrics."""
