"""Diagonalizing bases for symmetric polynomial matrix families and regulators.

The diagonalization follows the classical recursion: pick ``v1`` with
``Q(v1) = v1^T M v1`` not identically zero, complete it by the vectors
``b_j = a_p e_j - a_j e_p`` orthogonal to ``v1`` (``a = M v1``), and recurse
on the Gram matrix of the ``b_j``.  Gram matrices are divided exactly by the
current and previous pivots whenever possible (Sylvester's identity makes this
the common case), so every basis vector has polynomial entries and degrees
stay small.  The divisions are tracked so the reported diagonal entries are
the true values ``v_i^T M v_i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .quadform import (
    ProjectiveQuadraticIntegral,
    QuadFormError,
    QuadraticFamily,
    classify_point,
    is_positive_definite,
    is_positive_semidefinite,
)
from .symbolic import GaussianRational, Polynomial, SymbolicMatrix, as_scalar, exact_divide

__all__ = [
    "Diagonalization",
    "RegulatorFamily",
    "RegularizationError",
    "diagonalize_family",
    "build_regulator",
    "regularize_integral",
]

_ZERO = Polynomial.constant(0)
_ONE = Polynomial.constant(1)


class RegularizationError(ValueError):
    pass


@dataclass(frozen=True)
class _Step:
    """One elimination step acting on the trailing ``size`` coordinates.

    The step matrix has columns ``v1`` and ``b_j = (a_p e_j - a_j e_p) / s_j``
    for ``j != p``, where ``s_j`` is ``a_p`` when that division is exact and 1
    otherwise.
    """

    offset: int
    size: int
    v1: tuple[Polynomial, ...]
    a: tuple[Polynomial, ...]
    q: Polynomial
    pivot: int
    scales: tuple[Polynomial, ...]

    def columns(self) -> list[list[Polynomial]]:
        cols = [list(self.v1)]
        ap = self.a[self.pivot]
        for j in range(self.size):
            if j == self.pivot:
                continue
            col = [_ZERO] * self.size
            s = self.scales[j]
            if s == 1:
                col[j] = ap
                col[self.pivot] = -self.a[j]
            else:
                col[j] = _ONE
                col[self.pivot] = -exact_divide(self.a[j], s)
            cols.append(col)
        return cols

    def matrix(self) -> list[list[Polynomial]]:
        cols = self.columns()
        return [[cols[c][r] for c in range(self.size)] for r in range(self.size)]

    def _scale_product(self) -> Polynomial:
        out = _ONE
        for j, s in enumerate(self.scales):
            if j != self.pivot:
                out = out * s
        return out

    def det(self) -> Polynomial:
        if self.size == 1:
            return self.v1[0]
        # unscaled determinant is (-1)^p q a_p^(n-2)
        d = exact_divide(self.q * self.a[self.pivot] ** (self.size - 2), self._scale_product())
        return -d if self.pivot % 2 else d

    def adjugate(self) -> list[list[Polynomial]]:
        """Closed-form adjugate of the step matrix (rows indexed like its columns)."""
        n, p = self.size, self.pivot
        if n == 1:
            return [[_ONE]]
        ap = self.a[p]
        sign = -1 if p % 2 else 1
        prod = self._scale_product()
        # unscaled rows: (-1)^p a_p^(n-2) a^T and (-1)^p a_p^(n-3) (q e_j^T - v1_j a^T)
        rows = [[_div(x * ap ** (n - 2), prod) * sign for x in self.a]]
        for j in range(n):
            if j == p:
                continue
            row = [self.a[i] * -self.v1[j] for i in range(n)]
            row[j] = row[j] + self.q
            num = self.scales[j] * ap ** (n - 2)
            rows.append([_div(x * num, ap * prod) * sign for x in row])
        return rows


def _div(x: Polynomial, d: Polynomial) -> Polynomial:
    q = exact_divide(x, d)
    if q is None:
        raise ArithmeticError(f"inexact division of {x} by {d}")
    return q


@dataclass(frozen=True)
class Diagonalization:
    """``T^T M T = diag(diagonal)`` with polynomial basis matrix ``T``."""

    M: SymbolicMatrix
    T: SymbolicMatrix
    diagonal: tuple[Polynomial, ...]
    exceptional: tuple[Polynomial, ...]
    steps: tuple[_Step, ...]

    @property
    def n(self) -> int:
        return self.M.rows

    def zero_indices(self) -> list[int]:
        return [i for i, x in enumerate(self.diagonal) if not x]

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x)

    def det_T(self) -> Polynomial:
        d = _ONE
        for s in self.steps:
            d = d * s.det()
        return d

    def adjugate_T(self) -> SymbolicMatrix:
        """adj(T) = adj(L_r) ... adj(L_1) with adj(I + E) = det(E) I + adj(E)."""
        n = self.n
        result = SymbolicMatrix.identity(n)
        for s in self.steps:
            d = s.det()
            adjE = s.adjugate()
            rows = []
            for i in range(n):
                if i < s.offset:
                    rows.append([d if j == i else _ZERO for j in range(n)])
                elif i < s.offset + s.size:
                    rows.append([_ZERO] * s.offset + adjE[i - s.offset] + [_ZERO] * (n - s.offset - s.size))
                else:
                    rows.append([_ONE if j == i else _ZERO for j in range(n)])
            result = SymbolicMatrix(rows, n) @ result
        return result

    def check(self) -> bool:
        """Exact verification of the diagonalization identity."""
        D = self.T.transpose() @ self.M @ self.T
        return D == SymbolicMatrix.diagonal(list(self.diagonal))


def _value_at(p: Polynomial, point: Mapping | None):
    if point is None:
        return None
    v = p.subs(point)
    return v.constant_value() if not v.variables else None


def _quad_value(M: list[list[Polynomial]], idx: tuple[int, ...]) -> Polynomial:
    total = _ZERO
    for i in idx:
        for j in idx:
            if M[i][j]:
                total = total + M[i][j]
    return total


def _try_divide(G: list[list[Polynomial]], d: Polynomial):
    if not d or (not d.variables and d.constant_value() == 1):
        return None
    out = []
    for row in G:
        r = []
        for x in row:
            q = exact_divide(x, d) if x else _ZERO
            if q is None:
                return None
            r.append(q)
        out.append(r)
    return out


def diagonalize_family(M: SymbolicMatrix, prefer_point: Mapping | None = None) -> Diagonalization:
    """Exact diagonalizing basis of a symmetric polynomial matrix family.

    With ``prefer_point`` (exact values for the parameters), pivots whose true
    diagonal value there is a positive rational are preferred within each
    candidate tier, and pivot coordinates nonvanishing there are preferred.
    """
    if M.rows != M.cols:
        raise RegularizationError("matrix must be square")
    if not M.is_symmetric():
        raise RegularizationError("matrix family must be symmetric")
    if not M.is_polynomial():
        raise RegularizationError("entries must be polynomials")
    point = {k: as_scalar(v) for k, v in prefer_point.items()} if prefer_point else None
    n = M.rows
    cur = [list(r) for r in M.entries]
    scale = _ONE  # true Gram matrix of the remaining vectors = scale * cur
    prev_pivot = None
    steps: list[_Step] = []
    diagonal: list[Polynomial] = []
    exceptional: list[Polynomial] = []
    offset = 0
    while offset < n:
        m = n - offset
        if all(not x for r in cur for x in r):
            diagonal.extend([_ZERO] * m)
            break
        chosen = None
        for size in (1, 2, 3):
            ranked = []
            for idx in itertools.combinations(range(m), size):
                q = _quad_value(cur, idx)
                if not q:
                    continue
                positive = 1
                if point is not None:
                    val = _value_at(q * scale, point)
                    positive = 0 if val is not None and val.is_real() and val.re > 0 else 1
                ranked.append(((positive, q.total_degree(), idx), q))
            if ranked:
                key, q = min(ranked, key=lambda t: t[0])
                chosen = (key[2], q)
                break
        if chosen is None:
            raise RegularizationError("no pivot vector found among coordinate sums of size <= 3")
        idx, q = chosen
        v1 = tuple(_ONE if i in idx else _ZERO for i in range(m))
        a = tuple(_sum(cur[i][j] for i in idx) for j in range(m))
        nonzero = [j for j in range(m) if a[j]]
        pivot = idx[0] if len(idx) == 1 else min(nonzero, key=lambda j: a[j].total_degree())
        if point is not None and len(idx) > 1:
            good = [j for j in nonzero if _value_at(a[j], point) not in (None, 0)]
            if good:
                pivot = min(good, key=lambda j: a[j].total_degree())
        ap = a[pivot]
        scales = tuple(
            ap if j != pivot and ap.variables and exact_divide(a[j], ap) is not None else _ONE
            for j in range(m)
        )
        step = _Step(offset, m, v1, a, q, pivot, scales)
        steps.append(step)
        diagonal.append(scale * q)
        # det of the step matrix is +-q * a_p^(m-2)
        for g in (q if m >= 2 else _ONE, a[pivot] if m >= 3 else _ONE):
            if g.variables and g not in exceptional:
                exceptional.append(g)
        if m == 1:
            break
        cols = step.columns()[1:]
        # Gram matrix of the complement b_j
        Mb = [[_sum(cur[r][k] * col[k] for k in range(m) if col[k]) for r in range(m)] for col in cols]
        G = [[_sum(cols[i][r] * Mb[j][r] for r in range(m) if cols[i][r]) for j in range(len(cols))] for i in range(len(cols))]
        for d in (a[pivot], prev_pivot):
            if d is None:
                continue
            H = _try_divide(G, d)
            if H is not None:
                G = H
                scale = scale * d
        content = _content(G)
        if content != 1:
            G = [[x.scale(GaussianRational(1) / content) for x in r] for r in G]
            scale = scale.scale(content)
        prev_pivot = a[pivot]
        cur = G
        offset += 1
    T = SymbolicMatrix.identity(n)
    for s in steps:
        E = s.matrix()
        L = [[(_ONE if i == j else _ZERO) for j in range(n)] for i in range(n)]
        for i in range(s.size):
            for j in range(s.size):
                L[s.offset + i][s.offset + j] = E[i][j]
        T = T @ SymbolicMatrix(L, n)
    return Diagonalization(M, T, tuple(diagonal), tuple(exceptional), tuple(steps))


def _sum(items) -> Polynomial:
    total = _ZERO
    for x in items:
        total = total + x
    return total


def _content(G) -> GaussianRational:
    from gmpy2 import mpq

    g = None
    for r in G:
        for x in r:
            if x:
                c = x.content()
                g = c if g is None else _gcd_q(g, c)
    return GaussianRational(g if g is not None else mpq(1))


def _gcd_q(a, b):
    import gmpy2

    return gmpy2.mpq(gmpy2.gcd(a.numerator, b.numerator), gmpy2.lcm(a.denominator, b.denominator))


@dataclass(frozen=True)
class RegulatorFamily:
    """Regulator ``A`` with ``M + eps*A`` generically of full rank."""

    M: SymbolicMatrix
    A: SymbolicMatrix
    diagonalization: Diagonalization
    regulated: tuple[int, ...]
    epsilon: str = "eps"

    @property
    def rank_profile(self) -> int:
        """Number of diagonal entries that are not identically zero."""
        return self.diagonalization.rank

    def regularized(self) -> SymbolicMatrix:
        eps = Polynomial.variable(self.epsilon)
        return self.M + self.A.scale(eps) if not self.A.is_zero() else self.M

    def full_rank_certificate(self) -> bool:
        """det(M + eps A) is not the zero polynomial.

        Follows from T^T (M + eps A) T = diag(lambda) + eps det(T)^2 P_K with
        every lambda outside K and det(T) nonzero.
        """
        dz = self.diagonalization
        if not dz.det_T():
            return False
        return all(x for i, x in enumerate(dz.diagonal) if i not in self.regulated)

    def positive_definite_at(self, point: Mapping) -> tuple[bool, str]:
        """Exact certificate that M + eps A is positive definite for every eps > 0."""
        point = {k: as_scalar(v) for k, v in point.items()}
        if not is_positive_semidefinite(self.M, point):
            return False, "M is not positive semi-definite at the point"
        if not is_positive_semidefinite(self.A, point):
            return False, "A is not positive semi-definite at the point"
        if not is_positive_definite(self.M + self.A, point):
            return False, "M and A share a kernel vector at the point"
        return True, "M, A positive semi-definite with trivial joint kernel"


def build_regulator(M: SymbolicMatrix, prefer_point: Mapping | None = None, epsilon: str = "eps") -> RegulatorFamily:
    """A = adj(T)^T P_K adj(T) for the coordinate projector P_K onto regulated slots.

    K holds the identically vanishing diagonal entries, plus (when a point is
    preferred) those vanishing at that point.
    """
    dz = diagonalize_family(M, prefer_point)
    K = set(dz.zero_indices())
    if prefer_point:
        point = {k: as_scalar(v) for k, v in prefer_point.items()}
        for i, lam in enumerate(dz.diagonal):
            if lam and _value_at(lam, point) == 0:
                K.add(i)
    n = M.rows
    if not K:
        A = SymbolicMatrix.zeros(n, n)
    else:
        adj = dz.adjugate_T()
        rows = [adj.row(i) for i in sorted(K)]
        A = SymbolicMatrix(
            [[_sum(w[i] * w[j] for w in rows if w[i] and w[j]) for j in range(n)] for i in range(n)], n
        )
    return RegulatorFamily(M, A, dz, tuple(sorted(K)), epsilon)


def regularize_integral(
    I: ProjectiveQuadraticIntegral, t0: Mapping | None = None, epsilon: str = "eps"
) -> tuple[ProjectiveQuadraticIntegral, list[RegulatorFamily]]:
    """Replace each form matrix M_i by M_i + eps A_i.

    When ``t0`` is given it must be a quasi-regular point; the result is then
    certified regular at ``(t0, eps)`` for every positive ``eps``.
    """
    if epsilon in I.parameters or epsilon in I.coordinates:
        raise RegularizationError(f"regulator symbol {epsilon!r} clashes with an existing symbol")
    point = None
    if t0 is not None:
        point = {k: as_scalar(v) for k, v in t0.items()}
        try:
            verdict, notes = classify_point(I.forms, point)
        except QuadFormError as exc:
            raise RegularizationError(str(exc)) from None
        if verdict == "neither":
            raise RegularizationError("point is not quasi-regular: " + "; ".join(notes))
    regs = []
    forms = []
    params = tuple(I.parameters) + (epsilon,)
    for f in I.forms:
        reg = build_regulator(f.M, point, epsilon)
        regs.append(reg)
        forms.append(QuadraticFamily(f.variables, params, reg.regularized(), f.a, f.b, f.exponent))
    out = I.replace_forms(forms, params)
    if point is not None:
        for i, reg in enumerate(regs):
            ok, why = reg.positive_definite_at(point)
            if not ok:
                raise RegularizationError(f"form {i + 1}: regularization not positive definite at t0 ({why})")
    return out, regs
