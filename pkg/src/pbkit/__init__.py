"""Participatory budgeting aggregation and experiment toolkit."""

__version__ = "0.1.0"
