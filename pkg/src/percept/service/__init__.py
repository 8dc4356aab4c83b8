"""HTTP service wrapper around the analysis handlers."""

from .app import create_app

__all__ = ["create_app"]
