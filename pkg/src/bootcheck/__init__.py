"""Monte Carlo diagnostics for bootstrap consistency."""
__version__ = "0.1.0"
