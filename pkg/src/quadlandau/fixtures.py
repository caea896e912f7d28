"""Small worked examples used by tests, demos and the ``examples`` command."""
from __future__ import annotations

from .graph import Edge, FeynmanGraph
from .quadform import ProjectiveQuadraticIntegral, feynman_integral, quadric_integral

__all__ = [
    "simple",
    "two_quadrics",
    "bubble_graph",
    "sunrise_graph",
    "nested_bubble_graph",
    "tree_graph",
    "bubble",
    "sunrise",
    "GRAPHS",
    "INTEGRALS",
]


def simple() -> ProjectiveQuadraticIntegral:
    """One quadric y^2 + t^2 in one variable; its Landau surface is {t = 0}."""
    return quadric_integral(["z1^2 + t^2"], ["z1"], ["t"], aux="z0", name="simple")


def two_quadrics() -> ProjectiveQuadraticIntegral:
    """Two quadrics in the plane sharing the parameter t (one numerator power of z0)."""
    return quadric_integral(
        ["z1^2 + z2^2 + z1*t + 1", "z1^2 + z2^2 + t^2"],
        ["z1", "z2"],
        ["t"],
        aux="z0",
        numerator_degree=1,
        name="twoquadrics",
    )


def bubble_graph(dimension: int = 4) -> FeynmanGraph:
    return FeynmanGraph(
        ("a", "b"),
        (Edge("1", ("a", "b"), "m1"), Edge("2", ("a", "b"), "m2")),
        {"a": 1, "b": 1},
        dimension,
    )


def sunrise_graph(dimension: int = 4) -> FeynmanGraph:
    return FeynmanGraph(
        ("a", "b"),
        tuple(Edge(str(i), ("a", "b"), f"m{i}") for i in (1, 2, 3)),
        {"a": 1, "b": 1},
        dimension,
    )


def nested_bubble_graph(dimension: int = 4) -> FeynmanGraph:
    """A bubble whose second edge is itself replaced by a bubble."""
    return FeynmanGraph(
        ("a", "b", "c"),
        (
            Edge("1", ("a", "b"), "m"),
            Edge("2", ("a", "c"), "m"),
            Edge("3", ("c", "b"), "m"),
            Edge("4", ("c", "b"), "m"),
        ),
        {"a": 1, "b": 1},
        dimension,
    )


def tree_graph(dimension: int = 4) -> FeynmanGraph:
    return FeynmanGraph(("a", "b"), (Edge("1", ("a", "b"), "m1"),), {"a": 1, "b": 1}, dimension)


def bubble() -> ProjectiveQuadraticIntegral:
    return _named(feynman_integral(bubble_graph()), "bubble")


def sunrise() -> ProjectiveQuadraticIntegral:
    return _named(feynman_integral(sunrise_graph()), "sunrise")


def _named(i: ProjectiveQuadraticIntegral, name: str) -> ProjectiveQuadraticIntegral:
    return ProjectiveQuadraticIntegral(
        i.forms, i.coordinates, i.parameters, i.numerator_degree, i.graph, i.routing, name
    )


GRAPHS = {
    "bubble": bubble_graph,
    "sunrise": sunrise_graph,
    "nested-bubble": nested_bubble_graph,
    "tree": tree_graph,
}

INTEGRALS = {
    "simple": simple,
    "twoquadrics": two_quadrics,
    "bubble": bubble,
    "sunrise": sunrise,
}
