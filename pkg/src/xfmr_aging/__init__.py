"""Transformer insulation loss-of-life estimation with ANFIS and baseline regressors."""

__version__ = "0.1.0"
