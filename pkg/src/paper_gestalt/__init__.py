"""Paper-gestalt toolkit: page-grid dataset building, good/bad-paper
classification, trade-off evaluation and activation-map diagnostics."""

__version__ = "0.1.0"
