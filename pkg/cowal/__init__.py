"""
COWAL - Correlation-aware batch active learning for video frames
"""

__version__ = "0.1.0"

from .config.settings import get_settings
from .strategies import get_registry

__all__ = ["get_registry", "get_settings", "__version__"]
