"""File formats, point and grid syntax, and run manifests for the command line.

Inputs are JSON documents of four kinds, told apart by their fields:

* graph description: ``vertices``, ``edges``, ``external``, ``dimension``
  (optional ``weights``);
* quadric family: ``format = "quadlandau-quadrics"`` with ``functions``,
  ``variables``, ``parameters`` and optional ``exponents``, ``aux``,
  ``numerator_degree``, ``name``;
* Landau system: ``format = "quadlandau-landau-system"`` (see landau);
* a fixture name (``simple``, ``twoquadrics``, ``bubble``, ``sunrise``,
  ``nested-bubble``, ``tree``) in place of a path.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .fixtures import GRAPHS
from .graph import FeynmanGraph, GraphError
from .landau import FORMAT as SYSTEM_FORMAT
from .landau import LandauError, LandauSystem
from .quadform import ProjectiveQuadraticIntegral, QuadFormError, feynman_integral, quadric_integral
from .symbolic import GaussianRational, parse_polynomial

QUADRICS_FORMAT = "quadlandau-quadrics"

__all__ = [
    "InputError",
    "Loaded",
    "load_input",
    "quadrics_to_dict",
    "quadrics_from_dict",
    "fixture_document",
    "parse_value",
    "parse_point",
    "parse_grid",
    "RunManifest",
]


class InputError(ValueError):
    """Malformed or inconsistent input (exit code 2)."""


@dataclass
class Loaded:
    kind: str  # "graph", "quadrics" or "system"
    document: dict
    digest: str
    source: str
    graph: FeynmanGraph | None = None
    integral: ProjectiveQuadraticIntegral | None = None
    system: LandauSystem | None = None
    seed: int | None = None


def _digest(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def quadrics_to_dict(functions: Sequence[str], variables, parameters, exponents=None, aux="u",
                     numerator_degree=0, name="") -> dict:
    d = {
        "format": QUADRICS_FORMAT,
        "name": name,
        "variables": list(variables),
        "parameters": list(parameters),
        "functions": [str(f) for f in functions],
        "aux": aux,
        "numerator_degree": numerator_degree,
    }
    if exponents is not None:
        d["exponents"] = [str(x) for x in exponents]
    return d


def quadrics_from_dict(d: Mapping) -> ProjectiveQuadraticIntegral:
    allowed = {"format", "name", "variables", "parameters", "functions", "exponents", "aux", "numerator_degree"}
    extra = set(d) - allowed
    if extra:
        raise InputError(f"unknown field(s) in quadric file: {sorted(extra)}")
    for key in ("variables", "parameters", "functions"):
        if key not in d:
            raise InputError(f"quadric file lacks {key!r}")
    variables, parameters = list(d["variables"]), list(d["parameters"])
    funcs = []
    for i, text in enumerate(d["functions"]):
        try:
            funcs.append(parse_polynomial(str(text), variables + parameters))
        except ValueError as exc:
            raise InputError(f"functions[{i}]: {exc}") from None
    exps = d.get("exponents")
    if exps is not None:
        try:
            exps = [parse_value(str(x)) for x in exps]
        except InputError as exc:
            raise InputError(f"exponents: {exc}") from None
    try:
        return quadric_integral(funcs, variables, parameters, exps, d.get("aux", "u"),
                                int(d.get("numerator_degree", 0)), d.get("name", ""))
    except (QuadFormError, ValueError) as exc:
        raise InputError(str(exc)) from None


_QUADRIC_FIXTURES = {
    "simple": quadrics_to_dict(["z1^2 + t^2"], ["z1"], ["t"], aux="z0", name="simple"),
    "twoquadrics": quadrics_to_dict(
        ["z1^2 + z2^2 + z1*t + 1", "z1^2 + z2^2 + t^2"], ["z1", "z2"], ["t"], aux="z0",
        numerator_degree=1, name="twoquadrics",
    ),
}


def fixture_document(name: str) -> dict:
    if name in _QUADRIC_FIXTURES:
        return dict(_QUADRIC_FIXTURES[name])
    if name in GRAPHS:
        return GRAPHS[name]().to_dict()
    raise InputError(f"unknown example {name!r}; choose from {sorted(set(_QUADRIC_FIXTURES) | set(GRAPHS))}")


def fixture_names() -> list[str]:
    return sorted(set(_QUADRIC_FIXTURES) | set(GRAPHS))


def load_input(source: str) -> Loaded:
    """Read a path (or fixture name) and build the object it describes."""
    if os.path.exists(source):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{source}: {exc}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    elif source in fixture_names():
        doc = fixture_document(source)
    else:
        raise InputError(f"{source}: no such file or example")
    if not isinstance(doc, dict):
        raise InputError(f"{source}: top level must be a JSON object")
    digest = _digest(doc)
    fmt = doc.get("format")
    try:
        if fmt == SYSTEM_FORMAT:
            body = {k: v for k, v in doc.items() if k != "manifest"}
            sys = LandauSystem.from_dict(body)
            return Loaded("system", doc, digest, source, system=sys, seed=doc.get("seed"))
        if fmt == QUADRICS_FORMAT:
            return Loaded("quadrics", doc, digest, source, integral=quadrics_from_dict(doc))
        if fmt is not None:
            raise InputError(f"unknown format tag {fmt!r}")
        g = FeynmanGraph.from_dict(doc)
    except (GraphError, LandauError, QuadFormError) as exc:
        raise InputError(f"{source}: {exc}") from None
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None
    except (KeyError, TypeError) as exc:
        raise InputError(f"{source}: malformed document ({exc})") from None
    return Loaded("graph", doc, digest, source, graph=g)


def integral_of(loaded: Loaded) -> ProjectiveQuadraticIntegral:
    if loaded.integral is not None:
        return loaded.integral
    if loaded.graph is not None:
        if loaded.graph.h1 < 1:
            raise InputError(f"{loaded.source}: graph has no loops, so there is no integral to analyse")
        try:
            return feynman_integral(loaded.graph)
        except (GraphError, QuadFormError) as exc:
            raise InputError(f"{loaded.source}: {exc}") from None
    raise InputError(f"{loaded.source}: expected a graph or quadric family, got a {loaded.kind} file")


# --- points and grids --------------------------------------------------------


def parse_value(text: str) -> GaussianRational:
    """Exact complex value: integers, decimals, fractions, ``3i``, ``1/2+3/4i``."""
    try:
        p = parse_polynomial(text.strip(), [])
    except ValueError as exc:
        raise InputError(f"bad number {text!r}: {exc}") from None
    return p.constant_value()


def _split_vector(text: str) -> list[str]:
    text = text.strip()
    if text.startswith("(") and text.endswith(")") and _balanced(text[1:-1]):
        return [x for x in (s.strip() for s in text[1:-1].split(",")) if x != ""]
    return [text]


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


def _expand(name: str, n: int, parameters: Sequence[str], layout: Mapping | None) -> list[str]:
    if name in parameters and n == 1:
        return [name]
    if layout:
        if name in layout.get("external", {}):
            comps = list(layout["external"][name])
            if len(comps) != n:
                raise InputError(f"{name} has {len(comps)} components, got {n}")
            return comps
        if name == "m" and "m" not in parameters:
            masses = list(layout.get("masses", ()))
            if len(masses) != n:
                raise InputError(f"the graph has {len(masses)} mass symbols {masses}, got {n} values for m")
            return masses
    for pattern in (lambda i: f"{name}_{i}", lambda i: f"{name}{i + 1}"):
        comps = [pattern(i) for i in range(n)]
        if all(c in parameters for c in comps):
            return comps
    raise InputError(f"unknown symbol {name!r} (parameters: {', '.join(parameters)})")


def parse_point(text: str, parameters: Sequence[str], layout: Mapping | None = None,
                require_all: bool = True) -> dict[str, GaussianRational]:
    """Parse ``name=value;name=(v1,...,vk)`` into an exact assignment.

    Vector names expand to momentum components (``p`` -> p_0..p_3), to the
    graph's mass symbols (``m``), or to ``name_0..`` / ``name1..``.
    """
    point: dict[str, GaussianRational] = {}
    for i, item in enumerate(x for x in text.split(";") if x.strip()):
        if "=" not in item:
            raise InputError(f"point item {i + 1} ({item.strip()!r}) is not of the form name=value")
        name, value = (s.strip() for s in item.split("=", 1))
        values = _split_vector(value)
        names = _expand(name, len(values), parameters, layout)
        for n, v in zip(names, values):
            if n in point:
                raise InputError(f"{n} assigned twice")
            try:
                point[n] = parse_value(v)
            except InputError as exc:
                raise InputError(f"{n}: {exc}") from None
    if require_all:
        missing = [p for p in parameters if p not in point]
        if missing:
            raise InputError(f"point does not assign {', '.join(missing)}")
    return point


def parse_grid(text: str, parameters: Sequence[str], layout: Mapping | None = None,
               base: Mapping | None = None) -> list[dict[str, complex]]:
    """Cartesian grid from axes ``name.re=a:b:n``, ``name.im=a:b:n`` or ``name=v1,v2,...``.

    Axes are separated by ``;``; the first axis varies slowest.  Parameters
    not on any axis are taken from ``base``.
    """
    axes: list[tuple[str, str, list]] = []
    for item in (x for x in text.split(";") if x.strip()):
        if "=" not in item:
            raise InputError(f"grid axis {item.strip()!r} is not of the form name=spec")
        lhs, spec = (s.strip() for s in item.split("=", 1))
        part = "value"
        if lhs.endswith(".re") or lhs.endswith(".im"):
            lhs, part = lhs[:-3], lhs[-2:]
        if lhs not in parameters:
            raise InputError(f"unknown grid symbol {lhs!r}")
        if ":" in spec:
            try:
                a, b, n = spec.split(":")
                a, b, n = float(complex(parse_value(a)).real), float(complex(parse_value(b)).real), int(n)
            except ValueError:
                raise InputError(f"bad range {spec!r}; expected start:stop:count") from None
            if n < 1:
                raise InputError("grid counts must be positive")
            vals = list(np.linspace(a, b, n))
        else:
            vals = [complex(parse_value(v)) for v in spec.split(",")]
        axes.append((lhs, part, vals))
    if not axes:
        raise InputError("empty grid")
    base = dict(base or {})
    grid = []
    for combo in itertools.product(*(vals for _, _, vals in axes)):
        pt = {k: complex(v) for k, v in base.items()}
        seen: dict[str, complex] = {}
        for (name, part, _), v in zip(axes, combo):
            cur = seen.get(name, 0j)
            if part == "re":
                cur = complex(float(np.real(v)), cur.imag)
            elif part == "im":
                cur = complex(cur.real, float(np.real(v)))
            else:
                cur = complex(v)
            seen[name] = cur
        pt.update(seen)
        missing = [p for p in parameters if p not in pt]
        if missing:
            raise InputError(f"grid point does not assign {', '.join(missing)} (use --at)")
        grid.append({p: pt[p] for p in parameters})
    return grid


# --- manifests ---------------------------------------------------------------


@dataclass
class RunManifest:
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    config: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.seed,
            "config": self.config,
            "version": self.version,
        }

    def header(self) -> str:
        return "# manifest: " + json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def from_report(cls, text: str) -> "RunManifest":
        """Recover the manifest embedded in a text or JSON report."""
        first = text.lstrip().splitlines()[0] if text.strip() else ""
        if first.startswith("# manifest: "):
            d = json.loads(first[len("# manifest: "):])
        else:
            try:
                d = json.loads(text)["manifest"]
            except (ValueError, KeyError, TypeError):
                raise InputError("report carries no manifest") from None
        return cls(d["command"], d.get("inputs", {}), d.get("seed"), d.get("config", {}), d.get("version", ""))
