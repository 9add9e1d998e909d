"""Quantum coherent spaces, Choi morphisms and mixed-state TQFTs over (1+1)-D bordisms."""

__version__ = "1.0.0"
