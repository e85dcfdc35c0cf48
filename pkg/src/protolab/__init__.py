"""protolab: cross-domain prototypical pre-training for pixel-based continuous control."""

__version__ = "0.1.0"
