"""Perturbed-reward neural contextual bandits and baselines."""
__version__ = "0.1.0"
