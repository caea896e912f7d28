"""Landau equations of a projective quadratic integral.

For forms Q_1..Q_N in projective coordinates w = (u, z_1..z_n) the system is

    alpha_i = 0  or  Q_i(w) = 0          for every i,
    sum_i alpha_i dQ_i/dw_j / 2 = 0      for every coordinate w_j.

Three charts are supported.  ``projective`` keeps all of w and normalizes it
with a random affine row; ``finite`` sets u = 1 and drops the u-row (it follows
from the others by Euler's identity, see :meth:`LandauSystem.omitted_equations`);
``infinity`` sets u = 0 and keeps the u-row, which for Feynman forms is the
row sum_i alpha_i P_i(p).K_i(k).

The disjunction is resolved by enumerating the support S of alpha.  Each
:class:`BranchSystem` stores the random chart and projection rows it was drawn
with, so a solve can be replayed exactly.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .quadform import ProjectiveQuadraticIntegral
from .symbolic import GaussianRational, Polynomial, parse_polynomial

__all__ = [
    "CHARTS",
    "LandauError",
    "LandauSystem",
    "BranchSystem",
    "Witness",
    "generate_landau_system",
    "enumerate_branches",
    "draw_branch",
    "normalize_witness",
    "witness_residual",
    "physical_view",
    "is_physical",
]

CHARTS = ("projective", "finite", "infinity")
FORMAT = "quadlandau-landau-system"


class LandauError(ValueError):
    pass


@dataclass(frozen=True)
class LandauSystem:
    """Landau equations of one chart, with alpha kept symbolic.

    ``onshell[i]`` is Q_i restricted to the chart, ``gradients[i][j]`` is
    dQ_i/dw_j / 2 for the retained coordinates ``gradient_coords[j]``, and
    ``omitted[i]`` the u-derivative dropped by the finite chart.  ``layout``
    is present for Feynman input and names the momentum components and masses.
    """

    chart: str
    alphas: tuple[str, ...]
    coordinates: tuple[str, ...]
    unknowns: tuple[str, ...]
    parameters: tuple[str, ...]
    onshell: tuple[Polynomial, ...]
    gradients: tuple[tuple[Polynomial, ...], ...]
    gradient_coords: tuple[str, ...]
    omitted: tuple[Polynomial, ...] = ()
    layout: Mapping | None = field(default=None, compare=False)
    name: str = ""

    @property
    def N(self) -> int:
        return len(self.onshell)

    @property
    def aux(self) -> str:
        return self.coordinates[0]

    def gradient_equations(self, support: Sequence[int] | None = None) -> list[Polynomial]:
        """Rows sum_i alpha_i grad_j Q_i / 2, restricted to alpha_i with i in ``support`` (1-based)."""
        keep = range(1, self.N + 1) if support is None else support
        rows = []
        for j in range(len(self.gradient_coords)):
            acc = Polynomial.constant(0)
            for i in keep:
                g = self.gradients[i - 1][j]
                if g:
                    acc = acc + Polynomial.variable(self.alphas[i - 1]) * g
            rows.append(acc)
        return rows

    def omitted_equations(self, support: Sequence[int] | None = None) -> list[Polynomial]:
        """The u-row left out of the finite chart (empty for other charts)."""
        if not self.omitted:
            return []
        keep = range(1, self.N + 1) if support is None else support
        acc = Polynomial.constant(0)
        for i in keep:
            acc = acc + Polynomial.variable(self.alphas[i - 1]) * self.omitted[i - 1]
        return [acc]

    def fixed_coordinates(self) -> dict[str, int]:
        if self.chart == "finite":
            return {self.aux: 1}
        if self.chart == "infinity":
            return {self.aux: 0}
        return {}

    def is_feynman(self) -> bool:
        return self.layout is not None

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": 1,
            "name": self.name,
            "chart": self.chart,
            "alphas": list(self.alphas),
            "coordinates": list(self.coordinates),
            "unknowns": list(self.unknowns),
            "parameters": list(self.parameters),
            "onshell": [str(q) for q in self.onshell],
            "gradient_coords": list(self.gradient_coords),
            "gradients": [[str(g) for g in row] for row in self.gradients],
            "omitted": [str(g) for g in self.omitted],
            "layout": _layout_to_json(self.layout),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LandauSystem":
        known = {
            "format", "version", "name", "chart", "alphas", "coordinates", "unknowns",
            "parameters", "onshell", "gradient_coords", "gradients", "omitted", "layout",
            "branches", "seed",
        }
        extra = set(d) - known
        if extra:
            raise LandauError(f"unknown field(s) in system file: {sorted(extra)}")
        if d.get("format") != FORMAT:
            raise LandauError("not a Landau system file (format tag missing or wrong)")
        chart = d["chart"]
        if chart not in CHARTS:
            raise LandauError(f"unknown chart {chart!r}")
        allowed = list(d["alphas"]) + list(d["coordinates"]) + list(d["parameters"])

        def parse(s, where):
            try:
                return parse_polynomial(s, allowed)
            except ValueError as exc:
                raise LandauError(f"{where}: {exc}") from None

        onshell = tuple(parse(s, f"onshell[{i}]") for i, s in enumerate(d["onshell"]))
        grads = tuple(
            tuple(parse(s, f"gradients[{i}][{j}]") for j, s in enumerate(row))
            for i, row in enumerate(d["gradients"])
        )
        omitted = tuple(parse(s, f"omitted[{i}]") for i, s in enumerate(d.get("omitted", [])))
        return cls(
            chart,
            tuple(d["alphas"]),
            tuple(d["coordinates"]),
            tuple(d["unknowns"]),
            tuple(d["parameters"]),
            onshell,
            grads,
            tuple(d["gradient_coords"]),
            omitted,
            _layout_from_json(d.get("layout")),
            d.get("name", ""),
        )

    def dumps(self, seed: int | None = None) -> str:
        d = self.to_dict()
        if seed is not None:
            d["seed"] = seed
            d["branches"] = [b.to_dict() for b in enumerate_branches(self, seed)]
        return json.dumps(d, indent=1, sort_keys=True) + "\n"


def _layout_to_json(layout):
    if layout is None:
        return None
    return {k: (dict(v) if isinstance(v, Mapping) else list(v)) for k, v in layout.items()}


def _layout_from_json(d):
    if d is None:
        return None
    return {
        "external": {k: tuple(v) for k, v in d["external"].items()},
        "loops": {k: tuple(v) for k, v in d["loops"].items()},
        "masses": tuple(d["masses"]),
    }


def generate_landau_system(I: ProjectiveQuadraticIntegral, chart: str = "projective") -> LandauSystem:
    if chart not in CHARTS:
        raise LandauError(f"chart must be one of {CHARTS}, got {chart!r}")
    if not I.forms:
        raise LandauError("the integral has no quadratic forms")
    coords = I.coordinates
    aux = coords[0]
    alphas = tuple(f"alpha{i + 1}" for i in range(len(I.forms)))
    clash = set(alphas) & (set(coords) | set(I.parameters))
    if clash:
        raise LandauError(f"symbols {sorted(clash)} are reserved for the alpha multipliers")
    fix = {"finite": {aux: 1}, "infinity": {aux: 0}}.get(chart, {})
    onshell, grads, omitted = [], [], []
    rows = list(coords) if chart != "finite" else list(coords[1:])
    for f in I.forms:
        q = f.polynomial()
        g = f.gradient(halved=True)
        onshell.append(q.subs(fix) if fix else q)
        byname = dict(zip(f.variables, g))
        grads.append(tuple((byname[w].subs(fix) if fix else byname[w]) for w in rows))
        if chart == "finite":
            omitted.append(byname[aux].subs(fix))
    unknowns = tuple(coords) if chart == "projective" else tuple(coords[1:])
    layout = None
    if I.routing is not None:
        r = I.routing
        D = r.dimension
        layout = {
            "external": {p: tuple(f"{p}_{mu}" for mu in range(D)) for p in r.external_names},
            "loops": {k: tuple(f"{k}_{mu}" for mu in range(D)) for k in r.loop_names},
            "masses": tuple(dict.fromkeys(e.mass for e in r.graph.edges)),
        }
    return LandauSystem(
        chart,
        alphas,
        tuple(coords),
        unknowns,
        tuple(I.parameters),
        tuple(onshell),
        tuple(grads),
        tuple(rows),
        tuple(omitted),
        layout,
        I.name,
    )


# --- branches --------------------------------------------------------------


def _random_gaussian(rng: random.Random) -> GaussianRational:
    """Complex Gaussian sample rounded to a Gaussian rational with denominator 64."""
    re = Fraction(round(rng.gauss(0, 1) * 64), 64)
    im = Fraction(round(rng.gauss(0, 1) * 64), 64)
    if not re and not im:
        re = Fraction(1, 64)
    return GaussianRational(re, im)


@dataclass(frozen=True)
class BranchSystem:
    """Equations of one alpha-support branch plus its recorded random rows."""

    system: LandauSystem
    support: tuple[int, ...]
    index: int
    seed: int
    redraw: int
    alpha_chart: tuple[GaussianRational, ...]
    coord_chart: tuple[GaussianRational, ...]
    projection: tuple[tuple[GaussianRational, ...], ...]

    @property
    def id(self) -> str:
        return "{" + ",".join(str(i) for i in self.support) + "}"

    @property
    def alpha_names(self) -> tuple[str, ...]:
        return tuple(self.system.alphas[i - 1] for i in self.support)

    @property
    def unknowns(self) -> tuple[str, ...]:
        return self.alpha_names + self.system.unknowns

    def onshell_equations(self) -> list[Polynomial]:
        return [self.system.onshell[i - 1] for i in self.support]

    def core_equations(self) -> list[Polynomial]:
        """The branch's instance of the disjunctive system (no charts, no projection)."""
        return self.onshell_equations() + self.system.gradient_equations(self.support)

    def chart_equations(self) -> list[Polynomial]:
        rows = [_affine(self.alpha_names, self.alpha_chart)]
        if self.coord_chart:
            rows.append(_affine(self.system.unknowns, self.coord_chart))
        return rows

    def square_equations(self) -> list[Polynomial]:
        core = self.core_equations()
        if self.projection:
            core = [
                sum((e.scale(c) for c, e in zip(row, core) if c), Polynomial.constant(0))
                for row in self.projection
            ]
        return core + self.chart_equations()

    def full_equations(self) -> list[Polynomial]:
        return self.core_equations() + self.chart_equations()

    def to_dict(self) -> dict:
        return {
            "support": list(self.support),
            "index": self.index,
            "seed": self.seed,
            "redraw": self.redraw,
            "alpha_chart": [str(c) for c in self.alpha_chart],
            "coord_chart": [str(c) for c in self.coord_chart],
            "projection": [[str(c) for c in row] for row in self.projection],
        }

    @classmethod
    def from_dict(cls, system: LandauSystem, d: Mapping) -> "BranchSystem":
        parse = GaussianRational.parse
        return cls(
            system,
            tuple(d["support"]),
            d["index"],
            d["seed"],
            d["redraw"],
            tuple(parse(c) for c in d["alpha_chart"]),
            tuple(parse(c) for c in d["coord_chart"]),
            tuple(tuple(parse(c) for c in row) for row in d["projection"]),
        )


def _affine(names: Sequence[str], coeffs: Sequence[GaussianRational]) -> Polynomial:
    acc = Polynomial.constant(-1)
    for n, c in zip(names, coeffs):
        acc = acc + Polynomial.variable(n).scale(c)
    return acc


def _supports(N: int) -> list[tuple[int, ...]]:
    out = []
    for k in range(1, N + 1):
        out.extend(itertools.combinations(range(1, N + 1), k))
    return out


def draw_branch(sys: LandauSystem, support: Sequence[int], index: int, seed: int, redraw: int = 0) -> BranchSystem:
    """Draw the chart and projection rows of one branch from its own seeded stream."""
    rng = random.Random(f"quadlandau:{seed}:{index}:{redraw}")
    support = tuple(support)
    alpha_chart = tuple(_random_gaussian(rng) for _ in support)
    coord_chart = ()
    if sys.chart != "finite":
        coord_chart = tuple(_random_gaussian(rng) for _ in sys.unknowns)
    n_core = len(support) + len(sys.gradient_coords)
    n_unknown = len(support) + len(sys.unknowns)
    n_charts = 1 + (1 if coord_chart else 0)
    target = n_unknown - n_charts
    projection = ()
    if 0 < target < n_core:
        projection = tuple(tuple(_random_gaussian(rng) for _ in range(n_core)) for _ in range(target))
    return BranchSystem(sys, support, index, seed, redraw, alpha_chart, coord_chart, projection)


def enumerate_branches(sys: LandauSystem, seed: int = 0) -> list[BranchSystem]:
    """All 2^N - 1 supports, ordered by size then lexicographically."""
    return [draw_branch(sys, s, i, seed) for i, s in enumerate(_supports(sys.N))]


# --- witnesses --------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A numeric point (alpha, coordinates, parameters) with its recomputed residual.

    ``alpha`` has one entry per form (zeros outside the branch support) and
    ``coords`` one entry per projective coordinate, including the chart value
    of the auxiliary coordinate.
    """

    alpha: tuple[complex, ...]
    coords: tuple[complex, ...]
    params: tuple[complex, ...]
    residual: float
    branch: str
    chart: str

    def assignment(self, sys: LandauSystem) -> dict[str, complex]:
        a = dict(zip(sys.alphas, self.alpha))
        a.update(zip(sys.coordinates, self.coords))
        a.update(zip(sys.parameters, self.params))
        return a

    def to_dict(self) -> dict:
        return {
            "alpha": [_cstr(x) for x in self.alpha],
            "coords": [_cstr(x) for x in self.coords],
            "params": [_cstr(x) for x in self.params],
            "residual": float(self.residual),
            "branch": self.branch,
            "chart": self.chart,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Witness":
        return cls(
            tuple(complex(x) for x in d["alpha"]),
            tuple(complex(x) for x in d["coords"]),
            tuple(complex(x) for x in d["params"]),
            float(d.get("residual", math.nan)),
            d.get("branch", ""),
            d.get("chart", ""),
        )


def _cstr(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def normalize_witness(sys: LandauSystem, alpha, coords) -> tuple[np.ndarray, np.ndarray]:
    """Scale alpha to max modulus 1 and, outside the finite chart, coords likewise.

    Both are projective data, so residuals are only meaningful after fixing
    their scale.
    """
    alpha = np.asarray(alpha, dtype=complex)
    coords = np.asarray(coords, dtype=complex)
    amax = np.abs(alpha).max() if alpha.size else 0.0
    if amax == 0:
        raise LandauError("all alpha vanish; such points are excluded from the Landau system")
    alpha = alpha / alpha[np.argmax(np.abs(alpha))]
    if sys.chart != "finite":
        k = np.argmax(np.abs(coords))
        if coords[k] == 0:
            raise LandauError("all projective coordinates vanish")
        coords = coords / coords[k]
    return alpha, coords


def witness_residual(sys: LandauSystem, w: Witness, support: Sequence[int] | None = None) -> dict:
    """Evaluate the disjunctive system at ``w``.

    Per form i the disjunct residual is min(|alpha_i|, |Q_i|); gradient rows
    use all alpha.  ``support`` restricts to one branch (alpha outside is
    treated as exactly zero).
    """
    alpha, coords = normalize_witness(sys, w.alpha, w.coords)
    if support is not None:
        mask = np.zeros(sys.N, dtype=bool)
        mask[[i - 1 for i in support]] = True
        alpha = np.where(mask, alpha, 0)
        if not np.any(alpha):
            raise LandauError("all alpha vanish on the branch support")
    a = dict(zip(sys.alphas, alpha))
    a.update(zip(sys.coordinates, coords))
    a.update(zip(sys.parameters, w.params))
    onshell = [abs(q.evaluate(a)) for q in sys.onshell]
    disjunct = []
    per_form = []
    for i in range(sys.N):
        ra, rq = abs(alpha[i]), onshell[i]
        per_form.append(min(ra, rq))
        disjunct.append("alpha=0" if ra <= rq else "Q=0")
    grads = [abs(g.evaluate(a)) for g in sys.gradient_equations()]
    omitted = [abs(g.evaluate(a)) for g in sys.omitted_equations()]
    values = per_form + grads
    return {
        "residual": max(values) if values else 0.0,
        "onshell": onshell,
        "per_form": per_form,
        "disjunct": disjunct,
        "gradients": grads,
        "omitted": omitted,
    }


# --- physical points --------------------------------------------------------


def _minkowski_real(vec: np.ndarray) -> np.ndarray:
    """Map (i x_0, x_1, ...) to the real-intended vector (x_0, x_1, ...)."""
    out = vec.astype(complex).copy()
    out[0] = -1j * out[0]
    return out


def physical_view(sys: LandauSystem, w: Witness) -> dict:
    """Witness data in the frame where physicality is read off.

    Coordinates are brought to u = 1 (or a phase-fixed representative at
    u = 0), alpha is divided by its sum, and momenta are split into the
    components that must be real.
    """
    if not sys.is_feynman():
        raise LandauError("physicality is defined for Feynman-graph systems only")
    coords = np.asarray(w.coords, dtype=complex)
    alpha = np.asarray(w.alpha, dtype=complex)
    scale = np.abs(coords).max() or 1.0
    at_infinity = abs(coords[0]) <= 1e-9 * scale
    if not at_infinity:
        coords = coords / coords[0]
    names = dict(zip(sys.coordinates, coords))
    params = dict(zip(sys.parameters, np.asarray(w.params, dtype=complex)))
    lay = sys.layout
    loops = {k: _minkowski_real(np.array([names[c] for c in comps])) for k, comps in lay["loops"].items()}
    if at_infinity and loops:
        flat = np.concatenate(list(loops.values()))
        phase = flat[np.argmax(np.abs(flat))]
        phase = phase / abs(phase)
        loops = {k: v / phase for k, v in loops.items()}
    ext = {p: _minkowski_real(np.array([params[c] for c in comps])) for p, comps in lay["external"].items()}
    masses = {m: params[m] for m in lay["masses"]}
    s = alpha.sum()
    return {
        "alpha": alpha / s if abs(s) > 1e-12 * max(1.0, np.abs(alpha).max()) else None,
        "loops": loops,
        "external": ext,
        "masses": masses,
        "at_infinity": at_infinity,
    }


def physical_point_issues(sys: LandauSystem, params: Sequence[complex], tol: float = 1e-9) -> list[str]:
    """Reasons why the parameter point is not physical (empty list if it is)."""
    if not sys.is_feynman():
        raise LandauError("physicality is defined for Feynman-graph systems only")
    p = dict(zip(sys.parameters, np.asarray(params, dtype=complex)))
    issues = []
    for name, comps in sys.layout["external"].items():
        v = _minkowski_real(np.array([p[c] for c in comps]))
        if np.abs(v.imag).max() > tol:
            issues.append(f"{name} is not a Minkowski momentum")
        else:
            sq = -v.real[0] ** 2 + float(np.sum(v.real[1:] ** 2))
            if sq > tol:
                issues.append(f"{name}^2 = {sq:.6g} > 0")
    for m in sys.layout["masses"]:
        if abs(p[m].imag) > tol:
            issues.append(f"mass {m} is not real")
    return issues


def is_physical(sys: LandauSystem, w: Witness, tol: float = 1e-9, certify: bool = True) -> bool:
    """True if alpha >= 0 (not all zero), the point is physical and every k_j lies in M_k.

    The tolerance check is followed by a certification step: the witness is
    re-solved on the real slice (imaginary parts pinned to zero) and must
    still verify below ``tol``.
    """
    view = physical_view(sys, w)
    if view["alpha"] is None:
        return False
    a = view["alpha"]
    if np.abs(a.imag).max() > tol or a.real.min() < -tol:
        return False
    if physical_point_issues(sys, w.params, tol):
        return False
    for v in view["loops"].values():
        if np.abs(v.imag).max() > tol:
            return False
    if not certify:
        return True
    from .solver import solve_physical_slice

    return solve_physical_slice(sys, w) is not None
