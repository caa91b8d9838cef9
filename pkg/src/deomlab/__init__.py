"""Mixed dissipaton-equation-of-motion / Lindblad simulations of a five-level heat engine."""

from .model import ModelConfig, build_model
from .hierarchy import EngineOptions, build_hierarchy, propagate, steady_state

__all__ = ["ModelConfig", "build_model", "EngineOptions", "build_hierarchy", "propagate", "steady_state"]
