"""Euclidean projections onto parametric polyhedra and their stability."""

__version__ = "0.1.0"

from .errors import PolyprojError  # noqa: E402
from .projection import ProjectionResult, project, project_bruteforce  # noqa: E402
from .scenario import Polyhedron, Scenario, instantiate, load_scenario, parse_scenario  # noqa: E402

__all__ = [
    "__version__", "PolyprojError", "ProjectionResult", "project", "project_bruteforce",
    "Polyhedron", "Scenario", "instantiate", "load_scenario", "parse_scenario",
]
