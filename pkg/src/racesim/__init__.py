"""Closed-loop race-car dynamics simulation and model-fidelity benchmarks."""
