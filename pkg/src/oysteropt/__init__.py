"""Oystercatcher-family metaheuristics for black-box hyperparameter tuning."""

__version__ = "0.1.0"
