"""Multi-antenna GPS L1 C/A simulator and attack-resilient receiver pipeline."""

__version__ = "0.1.0"
