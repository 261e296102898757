"""Exception types raised across the package."""


class ViderexError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ViderexError):
    """Two images that must share a shape do not."""


class StoreError(ViderexError):
    """Route persistence failure."""


class NotARoute(StoreError):
    """Directory does not contain a route manifest."""


class CorruptRoute(StoreError):
    """Checksum verification failed."""


class DuplicateRoute(StoreError):
    """A route with this name already exists."""


class RouteNotFound(StoreError):
    """Named route is absent from the store or remote catalog."""


class TransferError(StoreError):
    """Network-level sync failure; safe to retry."""

    retryable = True
