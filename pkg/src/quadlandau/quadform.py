"""Quadratic families Q(t)(z) = z^T M z + 2 a^T z + b and their homogenization."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .graph import FeynmanGraph, Routing, build_routing
from .symbolic import (
    GaussianRational,
    Polynomial,
    SymbolicMatrix,
    as_scalar,
    determinant,
    parse_polynomial,
)

__all__ = [
    "QuadraticFamily",
    "ProjectiveQuadraticIntegral",
    "QuadFormError",
    "homogenize",
    "classify_point",
    "classify_matrix",
    "propagators_from_routing",
    "feynman_integral",
    "quadric_integral",
    "is_positive_definite",
    "is_positive_semidefinite",
]

_HALF = GaussianRational(Fraction(1, 2))


class QuadFormError(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticFamily:
    """A quadratic function in ``variables`` with coefficients polynomial in ``parameters``."""

    variables: tuple[str, ...]
    parameters: tuple[str, ...]
    M: SymbolicMatrix
    a: tuple[Polynomial, ...]
    b: Polynomial
    exponent: GaussianRational = field(default_factory=lambda: GaussianRational(1))

    def __post_init__(self):
        n = len(self.variables)
        if self.M.shape != (n, n) or len(self.a) != n:
            raise QuadFormError("matrix/vector sizes do not match the variable count")
        if not self.M.is_symmetric():
            raise QuadFormError("quadratic part must be symmetric")
        stray = set(self.M.variables()) | {v for x in self.a for v in x.variables} | set(self.b.variables)
        stray -= set(self.parameters)
        if stray:
            raise QuadFormError(f"coefficients use undeclared symbols {sorted(stray)}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @classmethod
    def from_polynomial(cls, q: Polynomial, variables: Sequence[str], parameters: Sequence[str], exponent=1):
        variables = tuple(variables)
        parameters = tuple(parameters)
        overlap = set(variables) & set(parameters)
        if overlap:
            raise QuadFormError(f"symbols declared both as variable and parameter: {sorted(overlap)}")
        unknown = set(q.variables) - set(variables) - set(parameters)
        if unknown:
            raise QuadFormError(f"undeclared symbol(s) {sorted(unknown)} in {q}")
        idx = [q.variables.index(v) if v in q.variables else None for v in variables]
        n = len(variables)
        zero = Polynomial.constant(0)
        M = [[zero] * n for _ in range(n)]
        a = [zero] * n
        b = zero
        keep = [i for i, v in enumerate(q.variables) if v not in variables]
        pnames = tuple(q.variables[i] for i in keep)
        for e, c in q.terms.items():
            zexp = [e[i] if i is not None else 0 for i in idx]
            deg = sum(zexp)
            coeff = Polynomial({tuple(e[i] for i in keep): c}, pnames)
            if deg > 2:
                raise QuadFormError(f"{q} has degree {deg} in the integration variables")
            if deg == 0:
                b = b + coeff
            elif deg == 1:
                j = zexp.index(1)
                a[j] = a[j] + coeff.scale(_HALF)
            else:
                nz = [j for j, k in enumerate(zexp) for _ in range(k)]
                j, l = nz
                if j == l:
                    M[j][j] = M[j][j] + coeff
                else:
                    h = coeff.scale(_HALF)
                    M[j][l] = M[j][l] + h
                    M[l][j] = M[l][j] + h
        return cls(variables, parameters, SymbolicMatrix(M, n), tuple(a), b, as_scalar(exponent))

    def polynomial(self) -> Polynomial:
        z = [Polynomial.variable(v) for v in self.variables]
        total = self.b
        for i in range(self.n):
            if self.a[i]:
                total = total + self.a[i] * z[i] * 2
            for j in range(self.n):
                if self.M[i, j]:
                    total = total + self.M[i, j] * z[i] * z[j]
        return total

    def is_form(self) -> bool:
        return not self.b and all(not x for x in self.a)

    def gradient(self, halved: bool = True) -> list[Polynomial]:
        """Partial derivatives in the variables, optionally divided by two."""
        z = [Polynomial.variable(v) for v in self.variables]
        out = []
        for i in range(self.n):
            g = self.a[i]
            for j in range(self.n):
                if self.M[i, j]:
                    g = g + self.M[i, j] * z[j]
            out.append(g if halved else g * 2)
        return out

    def subs(self, values: Mapping) -> "QuadraticFamily":
        params = tuple(p for p in self.parameters if p not in values)
        return QuadraticFamily(
            self.variables,
            params,
            self.M.subs(values),
            tuple(x.subs(values) for x in self.a),
            self.b.subs(values),
            self.exponent,
        )

    def with_matrix(self, M: SymbolicMatrix, parameters: Sequence[str] | None = None) -> "QuadraticFamily":
        return QuadraticFamily(
            self.variables, tuple(parameters or self.parameters), M, self.a, self.b, self.exponent
        )

    def __str__(self):
        return str(self.polynomial())


def homogenize(q: QuadraticFamily, aux: str = "u") -> QuadraticFamily:
    """The pure form with bordered matrix ((b, a^T), (a, M)) in ``(aux, z)``."""
    if aux in q.variables or aux in q.parameters:
        raise QuadFormError(f"auxiliary variable {aux!r} clashes with an existing symbol")
    n = q.n
    rows = [[q.b] + list(q.a)]
    for i in range(n):
        rows.append([q.a[i]] + [q.M[i, j] for j in range(n)])
    zero = Polynomial.constant(0)
    return QuadraticFamily(
        (aux,) + q.variables, q.parameters, SymbolicMatrix(rows, n + 1), (zero,) * (n + 1), zero, q.exponent
    )


# --- exact definiteness -----------------------------------------------------


def _exact_matrix(M: SymbolicMatrix, point: Mapping | None) -> list[list[GaussianRational]]:
    sub = M.subs(point) if point else M
    out = []
    for r in sub.entries:
        row = []
        for x in r:
            if x.variables:
                raise QuadFormError(f"entry {x} still depends on {list(x.variables)}")
            row.append(x.constant_value())
        out.append(row)
    return out


def _ldl_signs(A: list[list]) -> tuple[bool, bool]:
    """Exact (positive definite, positive semidefinite) for a real symmetric matrix."""
    n = len(A)
    a = [[x.re for x in r] for r in A]
    pd = True
    active = list(range(n))
    while active:
        k = active[0]
        piv = a[k][k]
        if piv < 0:
            return False, False
        if piv == 0:
            pd = False
            if any(a[k][j] != 0 for j in active):
                return False, False
            active = active[1:]
            continue
        rest = active[1:]
        for i in rest:
            f = a[i][k] / piv
            if f:
                for j in rest:
                    a[i][j] -= f * a[k][j]
        active = rest
    return pd, True


def is_positive_definite(M: SymbolicMatrix, point: Mapping | None = None) -> bool:
    A = _exact_matrix(M, point)
    if any(x.im for r in A for x in r):
        return False
    return _ldl_signs(A)[0]


def is_positive_semidefinite(M: SymbolicMatrix, point: Mapping | None = None) -> bool:
    A = _exact_matrix(M, point)
    if any(x.im for r in A for x in r):
        return False
    return _ldl_signs(A)[1]


def principal_minor_test(A: list[list]) -> tuple[bool, bool]:
    """Definiteness from leading principal minors (PD) and all principal minors (PSD)."""
    n = len(A)
    M = SymbolicMatrix([[Polynomial.constant(x) for x in r] for r in A], n)

    def minor(idx):
        return determinant(M.submatrix(idx, idx)).constant_value().re

    pd = all(minor(list(range(k))) > 0 for k in range(1, n + 1))
    psd = all(
        minor(list(s)) >= 0 for k in range(1, n + 1) for s in itertools.combinations(range(n), k)
    )
    return pd, psd


def classify_matrix(M: SymbolicMatrix, point: Mapping | None = None) -> tuple[str, str]:
    A = _exact_matrix(M, point)
    if any(x.im for r in A for x in r):
        return "neither", "matrix has non-real entries"
    pd, psd = _ldl_signs(A)
    if pd:
        return "regular", "positive definite"
    if psd:
        return "quasi-regular", "positive semi-definite, singular"
    return "neither", "indefinite"


def classify_point(forms: Sequence[QuadraticFamily], point: Mapping) -> tuple[str, list[str]]:
    """Return ("regular" | "quasi-regular" | "neither", per-form diagnostics)."""
    point = {k: as_scalar(v) for k, v in point.items()}
    verdicts = []
    notes = []
    for i, f in enumerate(forms):
        missing = set(f.parameters) - set(point)
        if missing:
            raise QuadFormError(f"point does not assign {sorted(missing)}")
        v, why = classify_matrix(f.M, point)
        verdicts.append(v)
        notes.append(f"form {i + 1}: {why}")
    if all(v == "regular" for v in verdicts):
        return "regular", notes
    if all(v in ("regular", "quasi-regular") for v in verdicts):
        return "quasi-regular", notes
    return "neither", notes


# --- propagators and integrals ----------------------------------------------


def propagators_from_routing(r: Routing, masses: Sequence[str] | None = None) -> list[QuadraticFamily]:
    """One family (K_e + P_e)^2 + m_e^2 per edge, Euclidean squares."""
    g = r.graph
    masses = list(masses) if masses is not None else [e.mass for e in g.edges]
    if len(masses) != len(g.edges):
        raise QuadFormError(f"{len(masses)} masses given for {len(g.edges)} edges")
    D = g.dimension
    variables = tuple(r.loop_components())
    params = tuple(r.external_components()) + tuple(dict.fromkeys(masses))
    out = []
    for e, m in zip(g.edges, masses):
        q = Polynomial.variable(m) ** 2
        for mu in range(D):
            x = r.momentum(e.id, mu)
            q = q + x * x
        out.append(QuadraticFamily.from_polynomial(q, variables, params, e.exponent))
    return out


@dataclass(frozen=True)
class ProjectiveQuadraticIntegral:
    """Homogenized forms in coordinates ``(aux, z_1..z_n)`` plus degree bookkeeping."""

    forms: tuple[QuadraticFamily, ...]
    coordinates: tuple[str, ...]
    parameters: tuple[str, ...]
    numerator_degree: int = 0
    graph: FeynmanGraph | None = None
    routing: Routing | None = None
    name: str = ""

    def __post_init__(self):
        for f in self.forms:
            if f.variables != self.coordinates:
                raise QuadFormError("all forms must share the projective coordinates")
            if not f.is_form():
                raise QuadFormError("projective integrals hold homogeneous forms only")

    @property
    def aux(self) -> str:
        return self.coordinates[0]

    @property
    def n(self) -> int:
        return len(self.coordinates) - 1

    @property
    def total_exponent(self) -> GaussianRational:
        return sum((f.exponent for f in self.forms), GaussianRational(0))

    @property
    def aux_power(self) -> GaussianRational:
        """Exponent of the auxiliary variable in the projective numerator."""
        return self.total_exponent * 2 - (self.n + 1) - self.numerator_degree

    def polynomials(self) -> list[Polynomial]:
        return [f.polynomial() for f in self.forms]

    def classify(self, point: Mapping) -> tuple[str, list[str]]:
        return classify_point(self.forms, point)

    def replace_forms(self, forms, parameters) -> "ProjectiveQuadraticIntegral":
        return ProjectiveQuadraticIntegral(
            tuple(forms), self.coordinates, tuple(parameters), self.numerator_degree,
            self.graph, self.routing, self.name,
        )


def feynman_integral(g: FeynmanGraph, v0: str | None = None, aux: str = "u") -> ProjectiveQuadraticIntegral:
    r = build_routing(g, v0)
    forms = [homogenize(q, aux) for q in propagators_from_routing(r)]
    params = forms[0].parameters if forms else ()
    return ProjectiveQuadraticIntegral(
        tuple(forms), (aux,) + tuple(r.loop_components()), params, 0, g, r
    )


def quadric_integral(
    functions: Sequence[str | Polynomial],
    variables: Sequence[str],
    parameters: Sequence[str],
    exponents: Sequence | None = None,
    aux: str = "u",
    numerator_degree: int = 0,
    name: str = "",
) -> ProjectiveQuadraticIntegral:
    """Projectivize a list of quadratic functions given as strings or polynomials."""
    allowed = list(variables) + list(parameters)
    exponents = list(exponents) if exponents is not None else [1] * len(functions)
    if len(exponents) != len(functions):
        raise QuadFormError("one exponent per function required")
    forms = []
    for f, lam in zip(functions, exponents):
        p = parse_polynomial(f, allowed) if isinstance(f, str) else f
        forms.append(homogenize(QuadraticFamily.from_polynomial(p, variables, parameters, lam), aux))
    return ProjectiveQuadraticIntegral(
        tuple(forms), (aux,) + tuple(variables), tuple(parameters), numerator_degree, name=name
    )
