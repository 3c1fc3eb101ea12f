"""HTTP service layer: JSON API over the library's operations."""

from .app import app, create_app

__all__ = ["app", "create_app"]
