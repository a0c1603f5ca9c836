"""Atomic decomposition harness for NLI and defeasible NLI."""

__version__ = "0.1.0"
