"""Event-transition graphs from clickstream logs, embedding-based edge
prediction, and Monte-Carlo what-if simulation of marketing campaigns."""

__version__ = "0.1.0"
