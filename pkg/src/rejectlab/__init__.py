"""Prototype classifiers with global reject options, evaluated by reject curves."""

__version__ = "0.1.0"
