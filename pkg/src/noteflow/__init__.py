"""Offline dataflow analysis, chart recommendation and chart tracing for
notebook scripts."""

__version__ = "0.1.0"
