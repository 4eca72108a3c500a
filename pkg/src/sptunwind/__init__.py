"""Fixed-point SPT chains, their unwinding circuits and the finite-group data behind them."""

__version__ = "0.1.0"
