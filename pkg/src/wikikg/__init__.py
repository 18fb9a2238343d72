"""Wikipedia knowledge-graph builder and per-article informetrics."""

__version__ = "0.1.0"
