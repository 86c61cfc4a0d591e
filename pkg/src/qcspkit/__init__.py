"""Quantified constraint satisfaction workbench: structures, clones, adversaries, collapsibility."""

__version__ = "0.1.0"
