"""Static edge-disjoint subgraph training for graph autoencoders."""

__version__ = "0.1.0"
