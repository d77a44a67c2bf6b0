"""Parameter sweeps, condition-family enumeration and fidelity search."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import (
    DEFAULT_TOL,
    NoTripletError,
    classify,
    fidelity,
    hbs_param_check,
    normalize,
    uniform_param_check,
)
from .core import CouplerParams, TripletAmplitudes
from .dynamics import analytic_amplitudes, analytic_state

THREADS_ENV = "TRIPLET_WALK_THREADS"
MIN_COUPLING = 1e-9
FAMILIES = ("hbs1", "hbs2", "hbs3", "uniform")

# Simplex refinement constants.
REFLECTION = 1.0
EXPANSION = 2.0
CONTRACTION = 0.5
SHRINK = 0.5
SIMPLEX_DIAMETER_TOL = 1e-9


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Ordered map over ``items``, threaded up to the configured cap."""
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"axis {self.name!r}: count must be >= 2")
        if not self.min < self.max:
            raise ValueError(f"axis {self.name!r}: need min < max")
        if self.spacing != "linear":
            raise ValueError(f"axis {self.name!r}: only linear spacing is supported")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)

    @property
    def step(self) -> float:
        return (self.max - self.min) / (self.count - 1)


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple[SweepAxis, ...]
    rule: str | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)


@dataclass
class SweepResult:
    """Normalized output probabilities per grid point, plus the raw norm.

    ``probabilities`` has shape ``grid.shape + (8,)``; ``norms`` and
    ``labels`` have shape ``grid.shape``.  ``dynamics`` holds raw
    ``|Psi|^2`` maps over z when the sweep produces them.
    """

    grid: SweepGrid
    probabilities: np.ndarray
    norms: np.ndarray
    labels: np.ndarray
    base: CouplerParams
    z: np.ndarray | None = None
    dynamics: np.ndarray | None = None

    def axis(self, name: str) -> np.ndarray:
        for a in self.grid.axes:
            if a.name == name:
                return a.values
        raise KeyError(name)

    def branches(self) -> dict[str, np.ndarray]:
        p = self.probabilities
        return {
            "000,111": p[..., [0, 7]].mean(axis=-1),
            "001,110": p[..., [3, 4]].mean(axis=-1),
            "010,101,100,011": p[..., [1, 2, 5, 6]].mean(axis=-1),
        }


def _evaluate_output(params: CouplerParams, tol: float):
    state = analytic_state(params, params.length)
    try:
        unit, norm = normalize(state)
    except NoTripletError:
        return np.zeros(8), 0.0, "none"
    return unit.probabilities, norm, classify(unit, tol).label


def sweep_dbeta_z(
    base: CouplerParams,
    dbeta_axis: SweepAxis,
    z_samples: int = 256,
    tol: float = DEFAULT_TOL,
) -> SweepResult:
    """Raw ``|Psi|^2(dbeta, z)`` maps on ``z in [0, L]`` and the z = L output per dbeta."""
    if z_samples < 2:
        raise ValueError("z_samples must be >= 2")
    z = np.linspace(0.0, base.length, z_samples)
    dbetas = dbeta_axis.values

    def point(db):
        params = base.replace(delta_beta=float(db))
        raw = np.abs(analytic_amplitudes(params, z)) ** 2
        return raw, _evaluate_output(params, tol)

    results = parallel_map(point, list(dbetas))
    dynamics = np.stack([r[0] for r in results])
    probs = np.stack([r[1][0] for r in results])
    norms = np.array([r[1][1] for r in results])
    labels = np.array([r[1][2] for r in results], dtype=object)
    grid = SweepGrid((dbeta_axis,))
    return SweepResult(grid, probs, norms, labels, base, z=z, dynamics=dynamics)


def find_norm_peaks(result: SweepResult, rel_height: float = 0.25) -> np.ndarray:
    """Axis values where the output norm is a 3-point local maximum.

    Only maxima at least ``rel_height`` times the global maximum are kept,
    which discards the sinc side lobes.
    """
    norms = np.asarray(result.norms, dtype=float)
    if norms.ndim != 1:
        raise ValueError("peak detection needs a one-dimensional sweep")
    x = result.grid.axes[0].values
    mid = norms[1:-1]
    is_peak = (mid > norms[:-2]) & (mid >= norms[2:]) & (mid >= rel_height * norms.max())
    return x[1:-1][is_peak]


def _dbeta_rule(rule) -> Callable[[float], float]:
    if rule in ("minus_c3", "-c3"):
        return lambda c3: -c3
    if isinstance(rule, (int, float)):
        value = float(rule)
        return lambda c3: value
    if isinstance(rule, (tuple, list)) and len(rule) == 2 and rule[0] == "fixed":
        value = float(rule[1])
        return lambda c3: value
    if isinstance(rule, dict) and "fixed" in rule:
        value = float(rule["fixed"])
        return lambda c3: value
    raise ValueError(f"unknown delta_beta rule {rule!r}; use 'minus_c3' or ('fixed', value)")


def _rule_name(rule) -> str:
    if rule in ("minus_c3", "-c3"):
        return "minus_c3"
    fn = _dbeta_rule(rule)
    return f"fixed({fn(0.0):g})"


def sweep_c3(
    base: CouplerParams,
    c3_axis: SweepAxis,
    dbeta_rule="minus_c3",
    tol: float = DEFAULT_TOL,
) -> SweepResult:
    """Output state versus C3 with delta_beta tied to C3 by ``dbeta_rule``."""
    if abs(base.c1 - base.c2) > 1e-12:
        raise ValueError("sweep_c3 expects C1 == C2 in the base parameters")
    rule = _dbeta_rule(dbeta_rule)

    def point(c3):
        return _evaluate_output(base.replace(c3=float(c3), delta_beta=rule(float(c3))), tol)

    results = parallel_map(point, list(c3_axis.values))
    grid = SweepGrid((c3_axis,), rule=_rule_name(dbeta_rule))
    return SweepResult(
        grid,
        np.stack([r[0] for r in results]),
        np.array([r[1] for r in results]),
        np.array([r[2] for r in results], dtype=object),
        base,
    )


def sweep_2d_hbs(
    c1c2_axis: SweepAxis,
    c3_axis: SweepAxis,
    base: CouplerParams | None = None,
    tol: float = DEFAULT_TOL,
) -> SweepResult:
    """Map over (C1 = C2, C3) with delta_beta = -C3."""
    base = base or CouplerParams()
    points = [(c, c3) for c in c1c2_axis.values for c3 in c3_axis.values]

    def point(pt):
        c, c3 = pt
        return _evaluate_output(
            base.replace(c1=float(c), c2=float(c), c3=float(c3), delta_beta=-float(c3)), tol
        )

    results = parallel_map(point, points)
    shape = (c1c2_axis.count, c3_axis.count)
    grid = SweepGrid((c1c2_axis, c3_axis), rule="minus_c3")
    return SweepResult(
        grid,
        np.stack([r[0] for r in results]).reshape(shape + (8,)),
        np.array([r[1] for r in results]).reshape(shape),
        np.array([r[2] for r in results], dtype=object).reshape(shape),
        base,
    )


@dataclass(frozen=True)
class ParameterBox:
    """Inclusive bounds on (C1, C2, C3, delta_beta)."""

    lower: tuple[float, float, float, float]
    upper: tuple[float, float, float, float]

    @classmethod
    def uniform(cls, c_min: float, c_max: float, db_min: float, db_max: float) -> "ParameterBox":
        return cls((c_min, c_min, c_min, db_min), (c_max, c_max, c_max, db_max))

    @property
    def empty(self) -> bool:
        return any(lo > hi for lo, hi in zip(self.lower, self.upper))

    def contains(self, params: CouplerParams, tol: float = 1e-12) -> bool:
        x = (params.c1, params.c2, params.c3, params.delta_beta)
        return all(lo - tol <= v <= hi + tol for v, lo, hi in zip(x, self.lower, self.upper))


def _family_candidates(family: str, bound: int) -> Iterable[tuple[float, float, float, float]]:
    rng = range(1, bound + 1)
    if family in ("hbs1", "hbs3"):
        # hbs1 collapses onto C1 = C2: unequal splits of C1 + C2 leave the
        # a and b modes unbalanced and never give a Bell state.
        for m in rng:
            for n in rng:
                if m != n:
                    yield (n / 4, n / 4, m / 4, -m / 4)
    elif family == "hbs2":
        for n in rng:
            for m in range(-bound, bound + 1):
                if m == 0 or m == n:
                    continue
                for k in rng:
                    c3 = k / 4
                    yield (n / 4, n / 4, c3, c3 - m / 2)
    elif family == "uniform":
        for n in range(0, bound + 1):
            for m in range(0, bound + 1):
                yield (n / 2, m / 2, (n + m) / 2, 0.0)
    else:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def enumerate_condition_families(
    family: str,
    integer_bound: int,
    box: ParameterBox,
    base: CouplerParams | None = None,
) -> list[CouplerParams]:
    """All admissible lattice points of ``family`` inside ``box``."""
    if integer_bound < 1:
        raise ValueError("integer_bound must be >= 1")
    base = base or CouplerParams()
    check = uniform_param_check if family == "uniform" else hbs_param_check
    out: list[CouplerParams] = []
    seen = set()
    for c1, c2, c3, db in _family_candidates(family, integer_bound):
        if box.empty or (c1, c2, c3, db) in seen:
            continue
        if min(c1, c2, c3) <= 0:
            continue
        params = base.replace(c1=c1, c2=c2, c3=c3, delta_beta=db)
        if not box.contains(params):
            continue
        matches = check(params, max_integer=integer_bound)
        if family != "uniform":
            matches = [mt for mt in matches if mt.family == family or family == "hbs1" and mt.family == "hbs3"]
        if not any(mt.residual == 0.0 for mt in matches):
            continue
        seen.add((c1, c2, c3, db))
        out.append(params)
    return out


@dataclass
class SearchOutcome:
    params: CouplerParams
    fidelity: float
    evaluations: int
    trace: list[tuple[int, float, tuple[float, float, float, float]]] = field(default_factory=list)
    grid_best: float = 0.0
    grid_size: int = 0


def grid_per_axis_for_budget(budget: int) -> int:
    k = max(2, int(math.floor((budget / 2) ** 0.25)))
    while k > 2 and k**4 > budget:
        k -= 1
    return k


def search_max_fidelity(
    target: TripletAmplitudes | np.ndarray,
    box: ParameterBox,
    budget: int,
    seed: int = 0,
    base: CouplerParams | None = None,
    grid_per_axis: int | None = None,
) -> SearchOutcome:
    """Coarse grid scan then bounded Nelder-Mead refinement of output fidelity.

    The objective is the fidelity of the normalized z = L output against
    ``target``.  Couplings are held at or above ``MIN_COUPLING``.
    """
    target_vec = target.amps if isinstance(target, TripletAmplitudes) else np.asarray(target, complex)
    if abs(np.linalg.norm(target_vec) - 1.0) > 1e-10:
        raise ValueError("target must have unit norm")
    if budget < 27:
        raise ValueError(f"budget must be >= 27, got {budget}")
    if box.empty or any(hi < MIN_COUPLING for hi in box.upper[:3]):
        raise ValueError(f"infeasible search box {box}")
    base = base or CouplerParams()
    lo = np.array(box.lower, dtype=float)
    hi = np.array(box.upper, dtype=float)
    lo[:3] = np.maximum(lo[:3], MIN_COUPLING)

    def clamp(x):
        return np.minimum(np.maximum(x, lo), hi)

    def objective(x) -> float:
        c1, c2, c3, db = (float(v) for v in x)
        state = analytic_state(base.replace(c1=c1, c2=c2, c3=c3, delta_beta=db), base.length)
        try:
            unit, _ = normalize(state)
        except NoTripletError:
            return 0.0
        return fidelity(unit, target_vec)

    k = grid_per_axis or grid_per_axis_for_budget(budget)
    if k**4 > budget:
        raise ValueError(f"grid of {k}^4 points exceeds budget {budget}")
    axes = [np.linspace(lo[i], hi[i], k) if hi[i] > lo[i] else np.array([lo[i]]) for i in range(4)]
    grid_points = [np.array(p) for p in np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 4)]
    grid_values = parallel_map(objective, grid_points)

    evaluations = len(grid_points)
    trace = []
    best_f = -1.0
    best_x = grid_points[0]
    for i, (x, f) in enumerate(zip(grid_points, grid_values)):
        if f > best_f:
            best_f, best_x = f, x
            trace.append((i + 1, f, tuple(map(float, x))))
    grid_best = best_f

    rng = np.random.default_rng(seed)
    spacing = np.array([(hi[i] - lo[i]) / max(len(axes[i]) - 1, 1) for i in range(4)])
    signs = rng.choice([-1.0, 1.0], size=4)

    def evaluate(x):
        nonlocal evaluations, best_f, best_x
        x = clamp(x)
        f = objective(x)
        evaluations += 1
        if f > best_f:
            best_f, best_x = f, x
            trace.append((evaluations, f, tuple(map(float, x))))
        return x, -f

    if evaluations + 5 <= budget:
        simplex = [evaluate(best_x)]
        for i in range(4):
            x = best_x.copy()
            step = 0.5 * spacing[i] * signs[i]
            x[i] = x[i] + step if lo[i] <= x[i] + step <= hi[i] else x[i] - step
            simplex.append(evaluate(x))
        simplex = _nelder_mead(simplex, evaluate, lambda: budget - evaluations)

    c1, c2, c3, db = (float(v) for v in best_x)
    return SearchOutcome(
        base.replace(c1=c1, c2=c2, c3=c3, delta_beta=db),
        best_f,
        evaluations,
        trace,
        grid_best,
        len(grid_points),
    )


def _nelder_mead(simplex, evaluate, remaining):
    """Minimize in place over ``[(x, f), ...]`` until the budget or diameter runs out."""
    while remaining() > 0:
        simplex.sort(key=lambda item: item[1])
        pts = np.array([s[0] for s in simplex])
        diameter = max(np.linalg.norm(p - pts[0]) for p in pts[1:])
        if diameter < SIMPLEX_DIAMETER_TOL or simplex[0][1] <= -1.0 + 1e-15:
            break
        centroid = pts[:-1].mean(axis=0)
        worst_x, worst_f = simplex[-1]
        xr, fr = evaluate(centroid + REFLECTION * (centroid - worst_x))
        if fr < simplex[0][1]:
            if remaining() <= 0:
                simplex[-1] = (xr, fr)
                break
            xe, fe = evaluate(centroid + EXPANSION * (xr - centroid))
            simplex[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < simplex[-2][1]:
            simplex[-1] = (xr, fr)
            continue
        if remaining() <= 0:
            break
        if fr < worst_f:
            xc, fc = evaluate(centroid + CONTRACTION * (xr - centroid))
            accept = fc <= fr
        else:
            xc, fc = evaluate(centroid + CONTRACTION * (worst_x - centroid))
            accept = fc < worst_f
        if accept:
            simplex[-1] = (xc, fc)
            continue
        best = simplex[0][0]
        shrunk = [simplex[0]]
        for x, _ in simplex[1:]:
            if remaining() <= 0:
                break
            shrunk.append(evaluate(best + SHRINK * (x - best)))
        if len(shrunk) < len(simplex):
            break
        simplex = shrunk
    return simplex
