"""Numeric probing of Landau surfaces at fixed parameter points.

Each branch system is solved by damped Newton iteration on its square
(projected) form, started from seeded random points, then polished by
Gauss-Newton on the full unprojected system.  A point only counts as a
witness after the residual of the exact disjunctive system has been
recomputed at it.  Absence of witnesses is reported as "no-witness-found",
never as proof of non-membership.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .landau import (
    BranchSystem,
    LandauError,
    LandauSystem,
    Witness,
    draw_branch,
    enumerate_branches,
    generate_landau_system,
    normalize_witness,
    physical_point_issues,
    physical_view,
    witness_residual,
)
from .quadform import ProjectiveQuadraticIntegral
from .symbolic import Polynomial, as_scalar

__all__ = [
    "SolveConfig",
    "MembershipReport",
    "newton_solve",
    "verify_witness",
    "membership_test",
    "scan",
    "format_scan_table",
    "solve_physical_slice",
    "physical_slice_search",
]


@dataclass(frozen=True)
class SolveConfig:
    starts: int = 8
    max_iterations: int = 100
    residual_target: float = 1e-12
    tau: float = 1e-9
    seed: int = 0
    max_halvings: int = 30
    polish_iterations: int = 25
    cluster_radius: float = 1e-6
    chart_redraws: int = 3
    divergence_bound: float = 1e8

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be at least 1")
        if self.residual_target > self.tau:
            raise ValueError("residual target must not exceed the acceptance threshold")


class _Compiled:
    """Vectorized evaluation of polynomials and their Jacobian in ``unknowns``.

    Parameters are folded into the coefficients once per parameter point.
    """

    def __init__(self, polys: Sequence[Polynomial], unknowns: Sequence[str], params: Mapping[str, complex]):
        self.unknowns = list(unknowns)
        self.P = len(polys)
        idx = {v: i for i, v in enumerate(self.unknowns)}
        nu = len(self.unknowns)
        rows, coef, owner = [], [], []
        for p_i, p in enumerate(polys):
            for e, c in p.terms.items():
                val = complex(c)
                ex = [0] * nu
                for v, k in zip(p.variables, e):
                    if v in idx:
                        ex[idx[v]] = k
                    elif k:
                        if v not in params:
                            raise LandauError(f"no value given for parameter {v}")
                        val *= complex(params[v]) ** k
                rows.append(ex)
                coef.append(val)
                owner.append(p_i)
        self.E = np.array(rows, dtype=np.int64).reshape(len(rows), nu)
        self.c = np.array(coef, dtype=complex)
        self.S = np.zeros((len(rows), self.P), dtype=complex)
        if rows:
            self.S[np.arange(len(rows)), owner] = 1
        # derivative terms
        drows, dcoef, downer = [], [], []
        for t, ex in enumerate(rows):
            for v in range(nu):
                if ex[v]:
                    d = list(ex)
                    d[v] -= 1
                    drows.append(d)
                    dcoef.append(coef[t] * ex[v])
                    downer.append(owner[t] * nu + v)
        self.Ed = np.array(drows, dtype=np.int64).reshape(len(drows), nu)
        self.cd = np.array(dcoef, dtype=complex)
        self.Sd = np.zeros((len(drows), self.P * nu), dtype=complex)
        if drows:
            self.Sd[np.arange(len(drows)), downer] = 1
        self.nu = nu

    @staticmethod
    def _monomials(X, E):
        if E.shape[0] == 0:
            return np.zeros((X.shape[0], 0), dtype=complex)
        return np.prod(X[:, None, :] ** E[None, :, :], axis=2)

    def values(self, X: np.ndarray) -> np.ndarray:
        return (self._monomials(X, self.E) * self.c) @ self.S

    def jacobian(self, X: np.ndarray) -> np.ndarray:
        J = (self._monomials(X, self.Ed) * self.cd) @ self.Sd
        return J.reshape(X.shape[0], self.P, self.nu)


def _damped(sys: _Compiled, X: np.ndarray, iters: int, target: float, halvings: int, bound: float, trace=None):
    """Damped Newton / Gauss-Newton with minimum-norm steps, batched over rows of X."""
    X = X.copy()
    B = X.shape[0]
    active = np.ones(B, dtype=bool)
    F = sys.values(X)
    norm = np.linalg.norm(F, axis=1)
    for _ in range(iters):
        if trace is not None:
            trace.append(norm.copy())
        active &= np.isfinite(norm) & (norm > target) & (np.abs(X).max(axis=1) < bound)
        if not active.any():
            break
        rows = np.flatnonzero(active)
        J = sys.jacobian(X[rows])
        try:
            step = -np.einsum("bij,bj->bi", np.linalg.pinv(J, rcond=1e-13), F[rows])
        except np.linalg.LinAlgError:
            active[rows] = False
            break
        scale = np.ones(len(rows))
        pending = np.ones(len(rows), dtype=bool)
        newX = X[rows].copy()
        newF = F[rows].copy()
        newN = norm[rows].copy()
        for _h in range(halvings + 1):
            if not pending.any():
                break
            pr = np.flatnonzero(pending)
            cand = X[rows[pr]] + scale[pr, None] * step[pr]
            cF = sys.values(cand)
            cN = np.linalg.norm(cF, axis=1)
            ok = np.isfinite(cN) & (cN < norm[rows[pr]])
            acc = pr[ok]
            newX[acc], newF[acc], newN[acc] = cand[ok], cF[ok], cN[ok]
            pending[acc] = False
            scale[pr[~ok]] *= 0.5
        stalled = rows[pending]
        active[stalled] = False
        X[rows], F[rows], norm[rows] = newX, newF, newN
    return X, norm


def _starts(branch: BranchSystem, cfg: SolveConfig) -> np.ndarray:
    nu = len(branch.unknowns)
    na = len(branch.support)
    out = np.empty((cfg.starts, nu), dtype=complex)
    ach = np.array([complex(c) for c in branch.alpha_chart])
    cch = np.array([complex(c) for c in branch.coord_chart])
    for s in range(cfg.starts):
        rng = np.random.default_rng([cfg.seed, branch.index, branch.redraw, s])
        x = (rng.normal(size=nu) + 1j * rng.normal(size=nu)) / math.sqrt(2)
        a = x[:na]
        den = ach @ a
        if abs(den) > 1e-8:
            x[:na] = a / den
        if cch.size:
            den = cch @ x[na:]
            if abs(den) > 1e-8:
                x[na:] = x[na:] / den
        out[s] = x
    return out


def _param_values(sys: LandauSystem, t: Mapping) -> dict[str, complex]:
    missing = [p for p in sys.parameters if p not in t]
    if missing:
        raise LandauError(f"parameter point does not assign {missing}")
    return {p: _to_complex(t[p]) for p in sys.parameters}


def _to_complex(v) -> complex:
    if isinstance(v, (int, float, complex, np.number)):
        return complex(v)
    return complex(as_scalar(v))


def _witness_from(branch: BranchSystem, x: np.ndarray, tvals: Sequence[complex]) -> Witness:
    sys = branch.system
    na = len(branch.support)
    alpha = np.zeros(sys.N, dtype=complex)
    alpha[[i - 1 for i in branch.support]] = x[:na]
    z = x[na:]
    fixed = sys.fixed_coordinates()
    coords = np.concatenate([[fixed[sys.aux]], z]) if fixed else z
    alpha, coords = normalize_witness(sys, alpha, coords)
    return Witness(tuple(alpha), tuple(coords), tuple(tvals), math.nan, branch.id, sys.chart)


def newton_solve(branch: BranchSystem, t: Mapping, cfg: SolveConfig = SolveConfig(), stats: dict | None = None,
                 trace: list | None = None) -> list[Witness]:
    """Verified witnesses of one branch at parameter point ``t``."""
    sys = branch.system
    params = _param_values(sys, t)
    tvals = [params[p] for p in sys.parameters]
    current = branch
    found: list[Witness] = []
    converged = 0
    best = math.inf
    for redraw in range(cfg.chart_redraws + 1):
        if redraw:
            current = draw_branch(sys, branch.support, branch.index, branch.seed, redraw)
        sq = _Compiled(current.square_equations(), current.unknowns, params)
        full = _Compiled(current.full_equations(), current.unknowns, params)
        X0 = _starts(current, cfg)
        X, n1 = _damped(sq, X0, cfg.max_iterations, cfg.residual_target, cfg.max_halvings,
                        cfg.divergence_bound, trace)
        X, n2 = _damped(full, X, cfg.polish_iterations, cfg.residual_target, cfg.max_halvings,
                        cfg.divergence_bound)
        finite = np.isfinite(n2) & (np.abs(X).max(axis=1) < cfg.divergence_bound)
        for s in np.flatnonzero(finite):
            if n1[s] < 1e3 * cfg.tau:
                converged += 1
            try:
                w = _witness_from(current, X[s], tvals)
            except LandauError:
                continue
            rep = witness_residual(sys, w, current.support)
            best = min(best, rep["residual"])
            if rep["residual"] < cfg.tau:
                found.append(Witness(w.alpha, w.coords, w.params, rep["residual"], w.branch, w.chart))
        if finite.any():
            break
    if stats is not None:
        stats.update(branch=branch.id, starts=cfg.starts, converged=converged, best_residual=best,
                     witnesses=len(found))
    return _cluster(found, cfg.cluster_radius)


def _cluster(ws: list[Witness], radius: float) -> list[Witness]:
    out: list[Witness] = []
    keys = []
    for w in sorted(ws, key=lambda w: w.residual):
        v = np.concatenate([w.alpha, w.coords])
        if any(np.linalg.norm(v - k) < radius for k in keys):
            continue
        keys.append(v)
        out.append(w)
    return sorted(out, key=lambda w: (w.branch, float(np.linalg.norm(np.concatenate([w.alpha, w.coords])))))


def verify_witness(sys: LandauSystem, w: Witness, tau: float = 1e-9) -> dict:
    """Residual report of the disjunctive system at ``w``."""
    if len(w.alpha) != sys.N or len(w.coords) != len(sys.coordinates) or len(w.params) != len(sys.parameters):
        raise LandauError("witness dimensions do not match the system")
    if not any(abs(a) > 0 for a in w.alpha):
        raise LandauError("all alpha vanish; such points are excluded from the Landau system")
    fixed = sys.fixed_coordinates()
    if fixed and abs(w.coords[0] - fixed[sys.aux]) > 0:
        raise LandauError(f"witness does not lie in the {sys.chart} chart ({sys.aux} = {w.coords[0]})")
    rep = witness_residual(sys, w)
    rep["accepted"] = rep["residual"] < tau
    rep["tau"] = tau
    return rep


@dataclass
class MembershipReport:
    point: dict
    verdict: str
    witness: Witness | None
    branches: list[dict] = field(default_factory=list)
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def member(self) -> bool:
        return self.verdict == "member"

    def to_dict(self) -> dict:
        return {
            "point": {k: _num(v) for k, v in self.point.items()},
            "verdict": self.verdict,
            "witness": self.witness.to_dict() if self.witness else None,
            "branches": [
                {k: (_num(v) if isinstance(v, float) else v) for k, v in b.items()} for b in self.branches
            ],
        }


def _num(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _as_system(target, chart: str) -> LandauSystem:
    if isinstance(target, LandauSystem):
        return target
    if isinstance(target, ProjectiveQuadraticIntegral):
        return generate_landau_system(target, chart)
    raise TypeError("expected a LandauSystem or ProjectiveQuadraticIntegral")


def membership_test(target, t: Mapping, cfg: SolveConfig = SolveConfig(), chart: str = "projective",
                    branches: Sequence[BranchSystem] | None = None) -> MembershipReport:
    """Probe whether ``t`` lies on the Landau surface.  All branches are tried."""
    sys = _as_system(target, chart)
    params = _param_values(sys, t)
    branches = branches if branches is not None else enumerate_branches(sys, cfg.seed)
    stats = []
    found: list[Witness] = []
    for b in branches:
        st: dict = {}
        found.extend(newton_solve(b, params, cfg, st))
        stats.append(st)
    best = min(found, key=lambda w: w.residual) if found else None
    return MembershipReport(
        dict(params), "member" if found else "no-witness-found", best, stats, found
    )


def scan(target, grid: Sequence[Mapping], cfg: SolveConfig = SolveConfig(), chart: str = "projective") -> list[MembershipReport]:
    if not grid:
        raise ValueError("scan grid is empty")
    sys = _as_system(target, chart)
    branches = enumerate_branches(sys, cfg.seed)
    return [membership_test(sys, t, cfg, branches=branches) for t in grid]


def _fmt_c(z: complex) -> str:
    return f"{z.real + 0.0:.6g}{z.imag + 0.0:+.6g}i"


def format_scan_table(sys: LandauSystem, reports: Sequence[MembershipReport]) -> str:
    """Tab-separated table: point, verdict, branch, residual, witness coordinates."""
    lines = ["point\tverdict\tbranch\tresidual\twitness"]
    for r in reports:
        point = ";".join(f"{k}={_fmt_c(complex(v))}" for k, v in r.point.items())
        if r.witness:
            w = r.witness
            wit = ",".join(_fmt_c(z) for z in w.alpha + w.coords)
            lines.append(f"{point}\t{r.verdict}\t{w.branch}\t{w.residual:.3e}\t{wit}")
        else:
            lines.append(f"{point}\t{r.verdict}\t-\t-\t-")
    return "\n".join(lines) + "\n"


# --- real slice -------------------------------------------------------------


class _Slice:
    """Affine real parametrization of (alpha_S, coordinates) on the physical slice.

    alpha entries are real; every loop momentum is (i y_0, y_1, ..).  At
    infinity u = 0 and the momenta are normalized by a real chart row.
    """

    def __init__(self, sys: LandauSystem, support: Sequence[int], at_infinity: bool, rng: np.random.Generator):
        self.sys = sys
        self.support = tuple(support)
        self.at_infinity = at_infinity
        self.unknowns = [sys.alphas[i - 1] for i in self.support] + list(sys.unknowns)
        self.alpha_row = rng.normal(size=len(self.support))
        loops = [c for comps in sys.layout["loops"].values() for c in comps]
        self.loop_comps = loops
        self.loop_row = rng.normal(size=len(loops)) if at_infinity else None
        n_real = len(self.support) + len(loops)
        B = np.zeros((len(self.unknowns), n_real), dtype=complex)
        off = np.zeros(len(self.unknowns), dtype=complex)
        for j in range(len(self.support)):
            B[j, j] = 1
        col = {c: len(self.support) + j for j, c in enumerate(loops)}
        times = {comps[0] for comps in sys.layout["loops"].values()}
        for r, name in enumerate(self.unknowns[len(self.support):], start=len(self.support)):
            if name == sys.aux:
                off[r] = 0 if at_infinity else 1
            else:
                B[r, col[name]] = 1j if name in times else 1
        self.B, self.off = B, off

    def to_complex(self, y: np.ndarray) -> np.ndarray:
        return y @ self.B.T + self.off

    def equations(self) -> list[Polynomial]:
        sys = self.sys
        eqs = [sys.onshell[i - 1] for i in self.support] + sys.gradient_equations(self.support)
        fix = {}
        if sys.chart == "projective":
            fix = {sys.aux: 0 if self.at_infinity else 1}
        return [e.subs(fix) for e in eqs] if fix else eqs

    def charts(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Real chart residuals and their Jacobian rows."""
        na = len(self.support)
        rows = [np.concatenate([self.alpha_row, np.zeros(len(self.loop_comps))])]
        if self.at_infinity:
            rows.append(np.concatenate([np.zeros(na), self.loop_row]))
        R = np.array(rows)
        return y @ R.T - 1, R


def _real_gauss_newton(sl: _Slice, comp: _Compiled, Y: np.ndarray, iters: int, halvings: int = 30):
    def resid(Yb):
        F = comp.values(sl.to_complex(Yb))
        c, _ = sl.charts(Yb)
        return np.concatenate([F.real, F.imag, c], axis=1)

    r = resid(Y)
    norm = np.linalg.norm(r, axis=1)
    for _ in range(iters):
        act = np.isfinite(norm) & (norm > 1e-14)
        if not act.any():
            break
        rows = np.flatnonzero(act)
        Jc = comp.jacobian(sl.to_complex(Y[rows])) @ sl.B
        _, R = sl.charts(Y[rows])
        Jr = np.concatenate([Jc.real, Jc.imag, np.broadcast_to(R, (len(rows),) + R.shape)], axis=1)
        step = -np.einsum("bij,bj->bi", np.linalg.pinv(Jr, rcond=1e-13), r[rows])
        scale = np.ones(len(rows))
        pending = np.ones(len(rows), dtype=bool)
        for _h in range(halvings + 1):
            if not pending.any():
                break
            pr = np.flatnonzero(pending)
            cand = Y[rows[pr]] + scale[pr, None] * step[pr]
            cr = resid(cand)
            cn = np.linalg.norm(cr, axis=1)
            ok = np.isfinite(cn) & (cn < norm[rows[pr]])
            acc = pr[ok]
            Y[rows[acc]], r[rows[acc]], norm[rows[acc]] = cand[ok], cr[ok], cn[ok]
            pending[acc] = False
            scale[pr[~ok]] *= 0.5
        if pending.all():
            break
    return Y, norm


def _slice_witness(sl: _Slice, y: np.ndarray, tvals) -> Witness | None:
    sys = sl.sys
    x = sl.to_complex(y[None, :])[0]
    na = len(sl.support)
    alpha = np.zeros(sys.N, dtype=complex)
    alpha[[i - 1 for i in sl.support]] = x[:na]
    z = x[na:]
    if sys.chart == "projective":
        coords = z.copy()
        coords[0] = 0 if sl.at_infinity else 1
    else:
        coords = np.concatenate([[0 if sl.at_infinity else 1], z])
    if not np.any(alpha) or not np.all(np.isfinite(coords)):
        return None
    try:
        alpha, coords = normalize_witness(sys, alpha, coords)
    except LandauError:
        return None
    return Witness(tuple(alpha), tuple(coords), tuple(tvals), math.nan, "{" + ",".join(map(str, sl.support)) + "}", sys.chart)


def _physical_params(sys: LandauSystem, params: Sequence[complex]) -> list[complex]:
    """Pin the imaginary parts of the physical parameter frame to zero."""
    times = {comps[0] for comps in sys.layout["external"].values()}
    out = []
    for name, v in zip(sys.parameters, params):
        v = complex(v)
        out.append(complex(0, v.imag) if name in times else complex(v.real, 0))
    return out


def solve_physical_slice(sys: LandauSystem, w: Witness, tau: float = 1e-9, iterations: int = 60) -> Witness | None:
    """Re-solve a witness with all physical-frame imaginary parts pinned to zero.

    Returns the real-slice witness if it verifies below ``tau``, else None.
    """
    view = physical_view(sys, w)
    if view["alpha"] is None:
        return None
    a = view["alpha"]
    support = tuple(i + 1 for i in range(sys.N) if abs(a[i]) > 1e-7)
    if not support:
        return None
    sl = _Slice(sys, support, view["at_infinity"], np.random.default_rng(0))
    tvals = _physical_params(sys, w.params)
    comp = _Compiled(sl.equations(), sl.unknowns, dict(zip(sys.parameters, tvals)))
    loops = np.concatenate([view["loops"][k] for k in sys.layout["loops"]]).real if sys.layout["loops"] else np.zeros(0)
    alpha = a.real[[i - 1 for i in support]]
    s = sl.alpha_row @ alpha
    if abs(s) < 1e-12:
        return None
    alpha = alpha / s
    if view["at_infinity"]:
        s = sl.loop_row @ loops
        if abs(s) < 1e-12:
            return None
        loops = loops / s
    Y, _ = _real_gauss_newton(sl, comp, np.concatenate([alpha, loops])[None, :], iterations)
    out = _slice_witness(sl, Y[0], tvals)
    if out is None:
        return None
    rep = witness_residual(sys, out, support)
    if rep["residual"] >= tau:
        return None
    return Witness(out.alpha, out.coords, out.params, rep["residual"], out.branch, out.chart)


def physical_slice_search(sys: LandauSystem, t: Mapping, starts: int = 16, seed: int = 0,
                          tau: float = 1e-9, at_infinity: bool | None = None,
                          iterations: int = 80) -> list[Witness]:
    """Multi-start search for solutions with real alpha and every k_j in M_k.

    The parameter point must be physical.  ``at_infinity`` selects u = 0
    (default: u = 0 for the infinity chart, u = 1 otherwise).  Alpha may have
    any sign here; :func:`is_physical` adds the sign condition.
    """
    if not sys.is_feynman():
        raise LandauError("the physical slice is defined for Feynman-graph systems only")
    params = _param_values(sys, t)
    tvals = [params[p] for p in sys.parameters]
    issues = physical_point_issues(sys, tvals)
    if issues:
        raise LandauError("not a physical point: " + "; ".join(issues))
    if at_infinity is None:
        at_infinity = sys.chart == "infinity"
    if sys.chart == "finite" and at_infinity:
        raise LandauError("the finite chart has no points at infinity")
    if sys.chart == "infinity" and not at_infinity:
        raise LandauError("the infinity chart has no finite points")
    found = []
    for idx, support in enumerate(s for k in range(1, sys.N + 1) for s in _combos(sys.N, k)):
        rng = np.random.default_rng([seed, idx])
        sl = _Slice(sys, support, at_infinity, rng)
        comp = _Compiled(sl.equations(), sl.unknowns, dict(zip(sys.parameters, tvals)))
        Y = rng.normal(size=(starts, sl.B.shape[1]))
        Y, _ = _real_gauss_newton(sl, comp, Y, iterations)
        for y in Y:
            if not np.all(np.isfinite(y)) or np.abs(y).max() > 1e8:
                continue
            w = _slice_witness(sl, y, tvals)
            if w is None:
                continue
            rep = witness_residual(sys, w, support)
            if rep["residual"] < tau:
                found.append(Witness(w.alpha, w.coords, w.params, rep["residual"], w.branch, w.chart))
    return _cluster(found, 1e-6)


def _combos(N: int, k: int):
    import itertools

    return itertools.combinations(range(1, N + 1), k)
