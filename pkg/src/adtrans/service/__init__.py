"""HTTP service, CLI, and filesystem persistence for the pipeline."""

from .config import ServiceConfig, load_config
from .core import ApiError, PipelineService
from .store import Store

__all__ = ["ServiceConfig", "load_config", "ApiError", "PipelineService", "Store"]
