"""Shared exception base; concrete errors live next to the code that raises them."""


class SemiforgeError(Exception):
    """Base class for every error this package raises on purpose."""
