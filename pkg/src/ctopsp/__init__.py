"""Stochastic integer programs for multi-resource air traffic flow management with reroutes."""

__version__ = "0.1.0"
