"""Scenario execution engine for reproducible robotics experiments."""

__version__ = "0.1.0"
