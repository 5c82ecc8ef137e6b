"""Multimodal intention recognition by Independent Opinion Pool fusion."""

__version__ = "0.1.0"
