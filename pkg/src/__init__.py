"""Fairness-aware pain-recovery classification from wearable time series"""

__version__ = "1.0.0"
