"""Discrete vector equilibrium for the Nikishin interaction matrix.

Each interval carries a cosine-spaced grid; measures are probability vectors
on the grid nodes. The log kernel is regularized on the diagonal by the
local spacing (``|x_i - x_i|`` is replaced by ``h_i / 2``). Energies are
minimized by projected gradient on products of simplices, with the step set
from the largest eigenvalue of the kernel restricted to mass-zero vectors
and halved whenever the energy would increase.

All arithmetic is float64; the equilibrium only feeds exponent-scale
comparisons at the 1e-3 level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "InteractionMatrix",
    "EquilibriumSolution",
    "NonConvergenceError",
    "CrossValidationError",
    "cosine_grid",
    "potential",
    "arcsine_cdf",
    "cdf_distance",
    "cdf_distance_to",
    "solve_weighted_equilibrium",
    "solve_vector_equilibrium",
    "equilibrium_rates",
    "partial_sums",
    "form_exponent",
    "ratio_exponent",
    "curvature_exponent",
    "rate_exponent",
    "compare_solutions",
]


class NonConvergenceError(RuntimeError):
    """Iteration cap reached before both variational clauses held within ``tol``."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CrossValidationError(RuntimeError):
    """Energy descent and cyclic relaxation disagree beyond ``3 * tol``."""


def cosine_grid(a: float, b: float, G: int):
    """Nodes ``(a+b)/2 - (b-a)/2 cos((i - 1/2) pi / G)`` and local spacings.

    The spacing is the centred difference in the interior and the one-sided
    difference at the two end nodes.
    """
    if G < 2:
        raise ValueError("grid needs at least two nodes")
    i = np.arange(1, G + 1)
    x = (a + b) / 2 - (b - a) / 2 * np.cos((i - 0.5) * np.pi / G)
    h = np.empty(G)
    h[1:-1] = (x[2:] - x[:-2]) / 2
    h[0] = x[1] - x[0]
    h[-1] = x[-1] - x[-2]
    return x, h


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability vector on sorted real points.

    With ``edges`` (cell boundaries, one more than the points) the measure
    stands for a density spreading each mass uniformly over its cell, and the
    CDF is continuous piecewise linear. Without edges it is a sum of atoms.
    """

    points: np.ndarray
    masses: np.ndarray
    edges: np.ndarray | None = None
    spacing: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        w = np.asarray(self.masses, dtype=float)
        if p.shape != w.shape or p.ndim != 1:
            raise ValueError("points and masses must be 1-d arrays of equal length")
        if np.any(np.diff(p) < 0):
            raise ValueError("points must be sorted")
        if np.any(w < 0):
            raise ValueError("masses must be nonnegative")
        if abs(w.sum() - 1) > 1e-14 * max(1, len(w)) ** 0.5 * 10:
            raise ValueError(f"total mass {w.sum()!r} differs from 1")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "masses", w)
        if self.edges is not None:
            e = np.asarray(self.edges, dtype=float)
            if e.shape != (len(p) + 1,):
                raise ValueError("edges must have one more entry than points")
            object.__setattr__(self, "edges", e)

    @classmethod
    def on_grid(cls, a: float, b: float, masses) -> "DiscreteMeasure":
        x, h = cosine_grid(a, b, len(masses))
        edges = np.concatenate([[a], (x[1:] + x[:-1]) / 2, [b]])
        return cls(x, np.asarray(masses, dtype=float), edges, h)

    @classmethod
    def zero_counting(cls, roots: Sequence[float]) -> "DiscreteMeasure":
        """Normalized zero counting measure: mass ``1/deg`` at each root."""
        r = np.sort(np.asarray(roots, dtype=float))
        if len(r) == 0:
            raise ValueError("zero counting measure of a constant")
        return cls(r, np.full(len(r), 1.0 / len(r)))

    def cdf(self, t, left: bool = False):
        """``mu((-inf, t])``, or ``mu((-inf, t))`` with ``left=True`` (atoms only)."""
        t = np.asarray(t, dtype=float)
        if self.edges is not None:
            cum = np.concatenate([[0.0], np.cumsum(self.masses)])
            return np.clip(np.interp(t, self.edges, cum), 0.0, 1.0)
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        idx = np.searchsorted(self.points, t, side="left" if left else "right")
        return cum[idx]

    def reflected(self) -> "DiscreteMeasure":
        edges = None if self.edges is None else -self.edges[::-1]
        spacing = None if self.spacing is None else self.spacing[::-1]
        return DiscreteMeasure(-self.points[::-1], self.masses[::-1], edges, spacing)

    def support(self, threshold: float) -> tuple[float, float]:
        """Hull of the nodes whose mass exceeds ``threshold``."""
        act = self.points[self.masses >= threshold]
        return float(act.min()), float(act.max())


def arcsine_cdf(t, a: float = -1.0, b: float = 1.0):
    """CDF of the equilibrium (arcsine) measure of ``[a, b]``."""
    s = np.clip((2 * np.asarray(t, dtype=float) - a - b) / (b - a), -1.0, 1.0)
    return 0.5 + np.arcsin(s) / np.pi


def cdf_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Sup-distance between CDFs, exact for atoms and cell-spread measures.

    Between consecutive break points one CDF is constant and the other
    linear, so the supremum is attained at break points (both one-sided
    limits are checked).
    """
    pts = [mu.points, nu.points]
    for m in (mu, nu):
        if m.edges is not None:
            pts.append(m.edges)
    t = np.unique(np.concatenate(pts))
    d = 0.0
    for left in (False, True):
        d = max(d, float(np.max(np.abs(mu.cdf(t, left) - nu.cdf(t, left)))))
    return d


def cdf_distance_to(mu: DiscreteMeasure, F, extra: int = 4) -> float:
    """Sup-distance to a continuous CDF ``F``, sampled at break points and
    ``extra`` points per cell."""
    base = mu.edges if mu.edges is not None else mu.points
    s = np.linspace(0, 1, extra + 2)
    t = np.unique((base[:-1, None] + (base[1:] - base[:-1])[:, None] * s[None, :]).ravel())
    d = float(np.max(np.abs(mu.cdf(t) - F(t))))
    if mu.edges is None:
        d = max(d, float(np.max(np.abs(mu.cdf(mu.points, True) - F(mu.points)))))
    return d


def potential(mu: DiscreteMeasure, z):
    """``V^mu(z) = sum m_i log(1/|z - x_i|)`` with ``|z - x_i|`` floored at ``h_i/2``.

    For atom measures without spacing information no floor is applied.
    """
    z = np.asarray(z)
    flat = z.reshape(-1)
    d = np.abs(flat[:, None] - mu.points[None, :])
    if mu.spacing is not None:
        d = np.maximum(d, mu.spacing[None, :] / 2)
    out = -(np.log(d) @ mu.masses)
    return out.reshape(z.shape) if z.shape else float(out[0])


@dataclass(frozen=True)
class InteractionMatrix:
    """Tridiagonal matrix with 1 on the diagonal and -1/2 next to it."""

    m: int

    @property
    def entries(self) -> np.ndarray:
        C = np.eye(self.m)
        for j in range(self.m - 1):
            C[j, j + 1] = C[j + 1, j] = -0.5
        return C

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @staticmethod
    def predicted_eigenvalues(m: int) -> np.ndarray:
        k = np.arange(1, m + 1)
        return np.sort(1 - np.cos(k * np.pi / (m + 1)))


def _self_kernel(x, h):
    d = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, h / 2)
    return -np.log(d)


def _cross_kernel(x, y):
    return -np.log(np.abs(x[:, None] - y[None, :]))


def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    return np.maximum(v - css[rho - 1] / rho, 0.0)


def _clauses(U, mu, threshold):
    """Equality constant and the two clause residuals for one level."""
    act = mu >= threshold
    w = float(U[act].mean())
    dev = float(np.max(np.abs(U[act] - w)))
    low = float(np.min(U - w))
    return w, dev, low


def _tangent_lipschitz(apply, sizes, seed=0, iters=60):
    """Largest eigenvalue of the block operator on mass-zero vectors."""
    rng = np.random.default_rng(seed)
    v = [rng.standard_normal(s) for s in sizes]
    lam = 1.0
    for _ in range(iters):
        v = [b - b.mean() for b in v]
        w = apply(v)
        w = [b - b.mean() for b in w]
        lam = float(np.sqrt(sum(b @ b for b in w)))
        if lam == 0:
            return 1.0
        v = [b / lam for b in w]
    return lam * 1.01


@dataclass
class _Level:
    a: float
    b: float
    x: np.ndarray
    h: np.ndarray


def solve_weighted_equilibrium(grid, phi, tol: float = 1e-3, iter_cap: int = 20000,
                               mu0=None, kernel=None):
    """Equilibrium of a grid in the external field ``phi``.

    Parameters
    ----------
    grid : (a, b, G) or (points, spacing)
        Interval with grid size ``G`` (cosine grid), or explicit nodes.
    phi : array
        External field at the nodes.

    Returns
    -------
    measure : DiscreteMeasure
    w : float
        Mean of ``V^mu + phi`` over nodes with mass at least ``1e-3 / G``.
    info : dict
        ``dev`` (max deviation on the effective support), ``low`` (min of
        ``V^mu + phi - w``), ``iterations``, ``energy`` history.
    """
    if len(grid) == 3:
        a, b, G = grid
        x, h = cosine_grid(float(a), float(b), int(G))
    else:
        x, h = (np.asarray(g, dtype=float) for g in grid)
        a, b = float(x[0]), float(x[-1])
    G = len(x)
    if G < 64:
        raise ValueError("weighted equilibrium needs G >= 64")
    phi = np.asarray(phi, dtype=float)
    K = _self_kernel(x, h) if kernel is None else kernel
    lam = _tangent_lipschitz(lambda v: [K @ v[0]], [G])
    step = 1.0 / lam
    mu = np.full(G, 1.0 / G) if mu0 is None else np.asarray(mu0, dtype=float).copy()
    threshold = 1e-3 / G
    energy = lambda m: float(m @ (K @ m) + 2 * phi @ m)
    E = energy(mu)
    history = [E]
    for it in range(iter_cap + 1):
        U = K @ mu + phi
        w, dev, low = _clauses(U, mu, threshold)
        if dev <= tol and low >= -tol:
            edges = np.concatenate([[a], (x[1:] + x[:-1]) / 2, [b]])
            meas = DiscreteMeasure(x, mu / mu.sum(), edges, h)
            return meas, w, {"dev": dev, "low": low, "iterations": it, "energy": history}
        if it == iter_cap:
            break
        s = step
        while True:
            new = _project_simplex(mu - s * U)
            E_new = energy(new)
            if E_new <= E + 1e-15 * abs(E) or s < 1e-12 * step:
                break
            s /= 2
        if E_new > E + 1e-12 * max(1.0, abs(E)):
            raise RuntimeError("energy increased along the descent")
        mu, E = new, E_new
        history.append(E)
    raise NonConvergenceError(f"weighted equilibrium not certified after {iter_cap} iterations "
                              f"(dev={dev:.3e}, low={low:.3e})", {"dev": dev, "low": low})


@dataclass
class EquilibriumSolution:
    """Certified discrete vector equilibrium.

    ``residuals[j]`` holds ``(dev, low)``: the max deviation of the
    equality clause on the effective support and the min of the inequality
    clause over the grid.
    """

    lambdas: tuple
    omegas: np.ndarray
    grid_size: int
    tol: float
    method: str
    residuals: tuple
    intervals: tuple
    energy_history: list = field(default_factory=list, repr=False)
    iterations: int = 0

    @property
    def m(self) -> int:
        return len(self.lambdas)

    def V(self, j: int, z):
        """Potential of ``lambda_j``; ``V_0 = V_{m+1} = 0``."""
        if j == 0 or j == self.m + 1:
            return np.zeros(np.shape(z)) if np.shape(z) else 0.0
        return potential(self.lambdas[j - 1], z)

    def recertify(self) -> tuple:
        """Recompute clause residuals from the stored masses."""
        U = _coupled_potentials(self.lambdas)
        out = []
        for j, (lam, u) in enumerate(zip(self.lambdas, U)):
            w, dev, low = _clauses(u, lam.masses, 1e-3 / len(lam.masses))
            out.append((w, dev, low))
        return tuple(out)

    def reflected(self) -> "EquilibriumSolution":
        return EquilibriumSolution(
            tuple(l.reflected() for l in self.lambdas), self.omegas.copy(), self.grid_size,
            self.tol, self.method, self.residuals,
            tuple((-b, -a) for a, b in self.intervals), list(self.energy_history), self.iterations)

    def to_json(self) -> dict:
        r = lambda v: repr(float(v))
        return {
            "method": self.method, "grid_size": self.grid_size, "tol": r(self.tol),
            "intervals": [[r(a), r(b)] for a, b in self.intervals],
            "omegas": [r(w) for w in self.omegas],
            "residuals": [{"dev": r(d), "low": r(l)} for d, l in self.residuals],
            "iterations": self.iterations,
            "masses": [[r(v) for v in lam.masses] for lam in self.lambdas],
        }

    @classmethod
    def from_json(cls, data: dict) -> "EquilibriumSolution":
        intervals = tuple((float(a), float(b)) for a, b in data["intervals"])
        lambdas = tuple(DiscreteMeasure.on_grid(a, b, np.array([float(v) for v in ms]))
                        for (a, b), ms in zip(intervals, data["masses"]))
        return cls(lambdas, np.array([float(w) for w in data["omegas"]]), int(data["grid_size"]),
                   float(data["tol"]), data["method"],
                   tuple((float(d["dev"]), float(d["low"])) for d in data["residuals"]),
                   intervals, [], int(data.get("iterations", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _coupled_potentials(lambdas):
    """``U_j = V_j - (V_{j-1} + V_{j+1})/2`` at the nodes of level ``j``."""
    m = len(lambdas)
    out = []
    for j in range(m):
        lam = lambdas[j]
        U = potential(lam, lam.points)
        for k in (j - 1, j + 1):
            if 0 <= k < m:
                U = U - 0.5 * potential(lambdas[k], lam.points)
        out.append(U)
    return out


def _intervals_of(sys_or_intervals):
    if hasattr(sys_or_intervals, "intervals"):
        return tuple((float(iv.a), float(iv.b)) for iv in sys_or_intervals.intervals)
    out = []
    for iv in sys_or_intervals:
        if hasattr(iv, "a"):
            out.append((float(iv.a), float(iv.b)))
        else:
            out.append((float(iv[0]), float(iv[1])))
    return tuple(out)


def _energy_descent(levels, K, tol, iter_cap, mus=None):
    m = len(levels)
    G = len(levels[0].x)
    C = InteractionMatrix(m).entries
    pairs = [(j, k) for j in range(m) for k in range(m) if C[j, k] != 0]

    def apply(v):
        return [sum(C[j, k] * (K[(j, k)] @ v[k]) for k in range(m) if C[j, k] != 0)
                for j in range(m)]

    lam = _tangent_lipschitz(apply, [G] * m)
    step = 1.0 / lam
    mus = [np.full(G, 1.0 / G) for _ in range(m)] if mus is None else [u.copy() for u in mus]

    def energy(ms):
        return float(sum(C[j, k] * ms[j] @ (K[(j, k)] @ ms[k]) for j, k in pairs))

    E = energy(mus)
    history = [E]
    threshold = 1e-3 / G
    for it in range(iter_cap + 1):
        U = apply(mus)
        clauses = [_clauses(U[j], mus[j], threshold) for j in range(m)]
        if all(dev <= tol and low >= -tol for _, dev, low in clauses):
            return mus, clauses, history, it
        if it == iter_cap:
            break
        s = step
        while True:
            new = [_project_simplex(mus[j] - s * U[j]) for j in range(m)]
            E_new = energy(new)
            if E_new <= E + 1e-15 * abs(E) or s < 1e-12 * step:
                break
            s /= 2
        if E_new > E + 1e-12 * max(1.0, abs(E)):
            raise RuntimeError("energy increased along the descent")
        mus, E = new, E_new
        history.append(E)
    raise NonConvergenceError(f"energy descent not certified after {iter_cap} iterations",
                              [(dev, low) for _, dev, low in clauses])


def _cyclic_relaxation(levels, K, tol, iter_cap, max_sweeps=500):
    m = len(levels)
    G = len(levels[0].x)
    mus = [np.full(G, 1.0 / G) for _ in range(m)]
    measures = [DiscreteMeasure.on_grid(l.a, l.b, mu) for l, mu in zip(levels, mus)]
    iters = 0
    inner_tol = tol / 4
    for sweep in range(max_sweeps):
        moved = 0.0
        for j in range(m):
            phi = np.zeros(G)
            for k in (j - 1, j + 1):
                if 0 <= k < m:
                    phi -= 0.5 * (K[(j, k)] @ mus[k])
            meas, _, info = solve_weighted_equilibrium(
                (levels[j].x, levels[j].h), phi, inner_tol, iter_cap, mu0=mus[j], kernel=K[(j, j)])
            iters += info["iterations"]
            moved = max(moved, cdf_distance(meas, measures[j]))
            measures[j] = meas
            mus[j] = meas.masses
        U = [sum(InteractionMatrix(m).entries[j, k] * (K[(j, k)] @ mus[k])
                 for k in range(m) if (j, k) in K) for j in range(m)]
        clauses = [_clauses(U[j], mus[j], 1e-3 / G) for j in range(m)]
        certified = all(dev <= tol and low >= -tol for _, dev, low in clauses)
        if moved < tol and certified:
            return mus, clauses, [], iters
    raise NonConvergenceError(f"cyclic relaxation did not settle in {max_sweeps} sweeps",
                              [(dev, low) for _, dev, low in clauses])


def _kernels(levels):
    m = len(levels)
    K = {}
    for j in range(m):
        K[(j, j)] = _self_kernel(levels[j].x, levels[j].h)
        if j + 1 < m:
            K[(j, j + 1)] = _cross_kernel(levels[j].x, levels[j + 1].x)
            K[(j + 1, j)] = K[(j, j + 1)].T
    return K


def solve_vector_equilibrium(sys, grid_size: int = 2000, tol: float = 1e-3,
                             iter_cap: int = 20000, method: str = "energy-descent",
                             cross_validate: bool = False) -> EquilibriumSolution:
    """Vector equilibrium of the Nikishin interaction on the system's intervals.

    Parameters
    ----------
    sys : NikishinSystem or sequence of intervals
    method : {"energy-descent", "cyclic-relaxation"}
    cross_validate : bool
        Also run the other method and raise :class:`CrossValidationError` if
        the measures (CDF distance) or constants differ by more than
        ``3 * tol``.
    """
    intervals = _intervals_of(sys)
    for (a1, b1), (a2, b2) in zip(intervals, intervals[1:]):
        if not (b1 < a2 or b2 < a1):
            raise ValueError("consecutive intervals must be disjoint")
    levels = []
    for a, b in intervals:
        x, h = cosine_grid(a, b, grid_size)
        levels.append(_Level(a, b, x, h))
    K = _kernels(levels)
    solvers = {"energy-descent": _energy_descent, "cyclic-relaxation": _cyclic_relaxation}
    if method not in solvers:
        raise ValueError(f"unknown method {method!r}")
    sol = _package(levels, *solvers[method](levels, K, tol, iter_cap), grid_size, tol, method)
    if cross_validate:
        other = "cyclic-relaxation" if method == "energy-descent" else "energy-descent"
        alt = _package(levels, *solvers[other](levels, K, tol, iter_cap), grid_size, tol, other)
        check = compare_solutions(sol, alt)
        if check["max_cdf"] > 3 * tol or check["max_omega"] > 3 * tol:
            raise CrossValidationError(
                f"{method} and {other} disagree: CDF {check['max_cdf']:.3e}, "
                f"omega {check['max_omega']:.3e} (limit {3 * tol:.1e})")
    return sol


def compare_solutions(a: EquilibriumSolution, b: EquilibriumSolution) -> dict:
    cdf = [cdf_distance(x, y) for x, y in zip(a.lambdas, b.lambdas)]
    om = np.abs(np.asarray(a.omegas) - np.asarray(b.omegas))
    return {"cdf": cdf, "omega": om.tolist(), "max_cdf": max(cdf), "max_omega": float(om.max())}


def _package(levels, mus, clauses, history, iters, G, tol, method):
    lambdas = tuple(DiscreteMeasure.on_grid(l.a, l.b, mu / mu.sum()) for l, mu in zip(levels, mus))
    return EquilibriumSolution(
        lambdas=lambdas, omegas=np.array([w for w, _, _ in clauses]), grid_size=G, tol=tol,
        method=method, residuals=tuple((dev, low) for _, dev, low in clauses),
        intervals=tuple((l.a, l.b) for l in levels), energy_history=history, iterations=iters)


def partial_sums(eq: EquilibriumSolution) -> np.ndarray:
    """``w_j = sum_{k >= j} omega_k`` for ``j = 1..m`` (index 0 holds ``w_1``)."""
    return np.cumsum(np.asarray(eq.omegas)[::-1])[::-1]


def _require_off(eq, z, levels, what):
    z = np.asarray(z)
    for j in levels:
        if 1 <= j <= eq.m:
            a, b = eq.intervals[j - 1]
            d = np.hypot(np.maximum(np.maximum(a - z.real, z.real - b), 0), z.imag)
            if np.any(d < 1e-9 * (b - a)):
                raise ValueError(f"{what} is not defined on Delta_{j}")


def form_exponent(eq: EquilibriumSolution, j: int, z):
    """Predicted ``lim log|A_{n,j}(z)| / n``."""
    m = eq.m
    w = partial_sums(eq)
    if j == 0:
        _require_off(eq, z, [1], "the j=0 form field")
        return eq.V(1, z) - 2 * w[0]
    if j == m:
        _require_off(eq, z, [m], "the j=m form field")
        return -eq.V(m, z)
    _require_off(eq, z, [j, j + 1], f"the j={j} form field")
    return eq.V(j + 1, z) - eq.V(j, z) - 2 * w[j]


def ratio_exponent(eq: EquilibriumSolution, j: int, k: int, z):
    """Predicted ``lim log|A_{n,j}/A_{n,k}| / n`` for ``j < k``."""
    if not 0 <= j < k <= eq.m:
        raise ValueError("ratio exponent needs 0 <= j < k <= m")
    _require_off(eq, z, {j, j + 1, k, k + 1}, "the ratio field")
    om = np.asarray(eq.omegas)
    return (-eq.V(k + 1, z) + eq.V(k, z) + eq.V(j + 1, z) - eq.V(j, z)
            - 2 * om[j:k].sum())


def curvature_exponent(eq: EquilibriumSolution, k: int, z):
    """``-V_{k+1} + 2 V_k - V_{k-1} - 2 omega_k``: zero on the support, negative elsewhere."""
    return -eq.V(k + 1, z) + 2 * eq.V(k, z) - eq.V(k - 1, z) - 2 * eq.omegas[k - 1]


def rate_exponent(eq: EquilibriumSolution, z):
    """``2 V_m - V_{m-1} - 2 omega_m``, the convergence-rate field (log scale)."""
    m = eq.m
    return 2 * eq.V(m, z) - eq.V(m - 1, z) - 2 * eq.omegas[m - 1]


def equilibrium_rates(eq: EquilibriumSolution, z) -> dict:
    """All predicted fields at ``z`` on the exponent (log) scale.

    Keys: ``form_j`` for ``j = 0..m`` (``lim log|A_{n,j}|/n``), ``ratio_j_k``
    for ``0 <= j < k <= m`` (``lim log|A_{n,j}/A_{n,k}|/n``), ``curvature_k``,
    ``rate``, and ``partial_sums``. Fields undefined at ``z`` are omitted.
    """
    m = eq.m
    out = {"partial_sums": partial_sums(eq)}
    for j in range(m + 1):
        try:
            out[f"form_{j}"] = form_exponent(eq, j, z)
        except ValueError:
            pass
    for j in range(m):
        for k in range(j + 1, m + 1):
            try:
                out[f"ratio_{j}_{k}"] = ratio_exponent(eq, j, k, z)
            except ValueError:
                pass
    for k in range(1, m + 1):
        out[f"curvature_{k}"] = curvature_exponent(eq, k, z)
    out["rate"] = rate_exponent(eq, z)
    return out
