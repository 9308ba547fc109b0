"""Pseudo- and quasi-likelihood inference for finite-state Markov chains."""

__version__ = "0.1.0"
