"""Paraphrase transform sidecar: HTTP and stdio servers over pluggable backends."""
from .service import BackendUnavailable, ServiceError, TransformService
from .transforms import OPS, MockBackend

__version__ = "0.1.0"

__all__ = ["OPS", "MockBackend", "TransformService", "ServiceError",
           "BackendUnavailable", "__version__"]
