"""Executable hierarchical process graphs with typed higher-order contexts."""

from .checker import Diagnostic, check_graph, check_library, check_swap
from .interpreter import Engine
from .logic import evaluate, parse_formula
from .model import GraphLibrary, LibraryLoadError, load_library
from .registry import ActivityRegistry
from .runtime import Context, ProcessInstance, instantiate
from .specs import SynthesisSpec
from .synthesis import materialize, synthesize, validate_solution

__all__ = [
    "ActivityRegistry",
    "Context",
    "Diagnostic",
    "Engine",
    "GraphLibrary",
    "LibraryLoadError",
    "ProcessInstance",
    "SynthesisSpec",
    "check_graph",
    "check_library",
    "check_swap",
    "evaluate",
    "instantiate",
    "load_library",
    "materialize",
    "parse_formula",
    "synthesize",
    "validate_solution",
]

__version__ = "0.1.0"
