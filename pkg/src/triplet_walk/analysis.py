"""Normalization, density matrices, fidelities and state classification.

Also holds the integer-lattice parameter conditions under which the coupler
emits an exact heralded Bell state, uniform state or GHZ-like state, and the
weak-coupling leakage estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BASIS_LABELS, TWO_PI, CouplerParams, TripletAmplitudes, as_amplitudes, spectrum

UNIT_TOL = 1e-10
DEFAULT_TOL = 1e-3
DEFAULT_MAX_INTEGER = 32
MATCH_TOL = 1e-9

LABELS = ("HBS", "mirrored-HBS", "uniform", "GHZ-like")

HBS_SUPPORT = (0, 3, 4, 7)  # 000, 001, 110, 111
MIRRORED_SUPPORT = (1, 2, 5, 6)  # 100, 010, 101, 011
GHZ_SUPPORT = (0, 7)


class NoTripletError(ValueError):
    """Raised when a state has zero norm: no triplet was generated."""


def _ideal(support) -> np.ndarray:
    vec = np.zeros(8, dtype=complex)
    vec[list(support)] = 1.0
    return vec / np.linalg.norm(vec)


IDEAL_STATES: dict[str, np.ndarray] = {
    "HBS": _ideal(HBS_SUPPORT),
    "mirrored-HBS": _ideal(MIRRORED_SUPPORT),
    "uniform": _ideal(range(8)),
    "GHZ-like": _ideal(GHZ_SUPPORT),
}


# Heralded Bell state with the relative signs the symmetric coupler produces:
# the herald pair {001, 110} is opposite in sign to {000, 111}.
HBS_TARGET = np.array([0.5, 0, 0, -0.5, -0.5, 0, 0, 0.5], dtype=complex)


def ghz_state() -> TripletAmplitudes:
    return TripletAmplitudes(IDEAL_STATES["GHZ-like"])


def _vector(state) -> np.ndarray:
    if isinstance(state, TripletAmplitudes):
        return state.amps
    return np.asarray(state, dtype=complex).reshape(8)


def _require_unit(vec: np.ndarray, what: str = "state"):
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"{what} must have unit norm, got {norm:.17g}")


def normalize(amps) -> tuple[TripletAmplitudes, float]:
    state = as_amplitudes(amps) if not isinstance(amps, TripletAmplitudes) else amps
    norm = state.norm
    if norm == 0.0:
        raise NoTripletError("no triplet generated: state has zero norm")
    return TripletAmplitudes(state.amps / norm, state.frame), norm


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.rho - self.rho.conj().T)) <= tol)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)


def density_matrix(state) -> DensityMatrix:
    psi = _vector(state)
    _require_unit(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def fidelity(state, target) -> float:
    """Overlap probability ``|<target|state>|^2`` of two unit pure states."""
    psi, tgt = _vector(state), _vector(target)
    _require_unit(psi)
    _require_unit(tgt, "target")
    return float(min(1.0, abs(np.vdot(tgt, psi)) ** 2))


def phase_free_fidelity(state, target) -> float:
    """Fidelity after aligning each target phase with the state's own phase.

    Equals ``(sum_k |t_k| |psi_k|)^2``: the best fidelity any relative phasing
    of the target could reach.
    """
    psi, tgt = _vector(state), _vector(target)
    _require_unit(psi)
    _require_unit(tgt, "target")
    return float(min(1.0, np.dot(np.abs(tgt), np.abs(psi)) ** 2))


@dataclass(frozen=True)
class ClassificationReport:
    label: str
    scores: dict[str, float]
    tol: float
    probabilities: np.ndarray = field(repr=False)
    patterns: dict[str, bool] = field(default_factory=dict)

    @property
    def score(self) -> float:
        if self.label == "none":
            return max(self.scores.values())
        return self.scores[self.label]


def _support_pattern(p: np.ndarray, support, tol: float) -> bool:
    inside = p[list(support)]
    outside = np.delete(p, list(support))
    return bool(
        inside.max() - inside.min() <= tol and np.all(inside >= tol) and np.all(outside <= tol)
    )


def classify(state, tol: float = DEFAULT_TOL) -> ClassificationReport:
    """Label a unit state as HBS, mirrored-HBS, uniform, GHZ-like or none."""
    if not 0.0 < tol < 0.5:
        raise ValueError(f"tol must lie in (0, 0.5), got {tol}")
    psi = _vector(state)
    _require_unit(psi)
    p = np.abs(psi) ** 2
    patterns = {
        "HBS": _support_pattern(p, HBS_SUPPORT, tol),
        "mirrored-HBS": _support_pattern(p, MIRRORED_SUPPORT, tol),
        "uniform": bool(np.all(np.abs(p - 0.125) <= tol)),
        "GHZ-like": bool(p[0] + p[7] >= 1.0 - 6.0 * tol and abs(p[0] - p[7]) <= tol),
    }
    scores = {name: phase_free_fidelity(psi, IDEAL_STATES[name]) for name in LABELS}
    held = [name for name in LABELS if patterns[name]]
    label = max(held, key=lambda name: scores[name]) if held else "none"
    return ClassificationReport(label, scores, tol, p, patterns)


@dataclass(frozen=True)
class ConditionMatch:
    """Membership of a parameter set in one of the integer condition families.

    ``admissible`` records whether the eigenvalue conditions behind the
    family also hold, i.e. whether the ideal state is actually produced.
    """

    family: str
    m: int | None
    n: int | None
    residual: float
    admissible: bool = True


def _turns(lam: float, length: float) -> float:
    return lam * length / TWO_PI


def _is_nonzero_integer(x: float, tol: float = MATCH_TOL) -> bool:
    k = round(x)
    return k != 0 and abs(x - k) <= tol


def hbs_admissible(params: CouplerParams, tol: float = MATCH_TOL) -> bool:
    """Eigenvalue conditions for an exact heralded Bell state at the output.

    The c and d modes must complete a whole number of oscillations (so they
    vanish), the a and b modes must coincide (equal couplings C1 = C2) and must
    not vanish themselves.
    """
    sp = spectrum(params)
    L = params.length
    return (
        abs(params.c1 - params.c2) <= tol
        and _is_nonzero_integer(_turns(sp.lambda_c, L), tol)
        and _is_nonzero_integer(_turns(sp.lambda_d, L), tol)
        and not _is_nonzero_integer(_turns(sp.lambda_a, L), tol)
    )


def uniform_admissible(params: CouplerParams, tol: float = MATCH_TOL) -> bool:
    """Only the c mode survives: a, b, d complete, c does not."""
    sp = spectrum(params)
    L = params.length
    return (
        all(_is_nonzero_integer(_turns(lam, L), tol) for lam in (sp.lambda_a, sp.lambda_b, sp.lambda_d))
        and not _is_nonzero_integer(_turns(sp.lambda_c, L), tol)
    )


def _nearest(value: float, scale: float, max_integer: int, nonzero: bool = True):
    k = int(round(value * scale))
    if abs(k) > max_integer or (nonzero and k == 0):
        return None
    return k


def hbs_param_check(
    params: CouplerParams,
    max_integer: int = DEFAULT_MAX_INTEGER,
    tol: float = MATCH_TOL,
    require_admissible: bool = True,
) -> list[ConditionMatch]:
    """Test the three integer families that give a heralded Bell state.

    hbs1: C3 = -dbeta = m/4, C1 + C2 = n/2
    hbs2: C1 = C2 = n/4, C3 - dbeta = m/2
    hbs3: C3 = -dbeta = m/4, C1 = C2 = n/4
    with m != n, both nonzero and bounded by ``max_integer``.
    """
    c1, c2, c3, db = params.c1, params.c2, params.c3, params.delta_beta
    candidates = []

    m = _nearest(c3, 4, max_integer)
    n = _nearest(c1 + c2, 2, max_integer)
    if m is not None and n is not None:
        res = max(abs(c3 - m / 4), abs(-db - m / 4), abs(c1 + c2 - n / 2))
        candidates.append(("hbs1", m, n, res))

    n = _nearest(c1, 4, max_integer)
    m = _nearest(c3 - db, 2, max_integer)
    if m is not None and n is not None:
        res = max(abs(c1 - n / 4), abs(c2 - n / 4), abs(c3 - db - m / 2))
        candidates.append(("hbs2", m, n, res))

    m = _nearest(c3, 4, max_integer)
    n = _nearest(c1, 4, max_integer)
    if m is not None and n is not None:
        res = max(abs(c3 - m / 4), abs(-db - m / 4), abs(c1 - n / 4), abs(c2 - n / 4))
        candidates.append(("hbs3", m, n, res))

    admissible = hbs_admissible(params, tol)
    out = []
    for family, m, n, res in candidates:
        if m == n or res > tol:
            continue
        if require_admissible and not admissible:
            continue
        out.append(ConditionMatch(family, m, n, res, admissible))
    return out


def uniform_param_check(
    params: CouplerParams,
    max_integer: int = DEFAULT_MAX_INTEGER,
    tol: float = MATCH_TOL,
    require_admissible: bool = True,
) -> list[ConditionMatch]:
    """Uniform family: dbeta = 0, C1 = n/2, C2 = m/2, C3 = (n + m)/2."""
    n = _nearest(params.c1, 2, max_integer, nonzero=False)
    m = _nearest(params.c2, 2, max_integer, nonzero=False)
    if n is None or m is None or n < 0 or m < 0:
        return []
    res = max(
        abs(params.delta_beta),
        abs(params.c1 - n / 2),
        abs(params.c2 - m / 2),
        abs(params.c3 - (n + m) / 2),
    )
    if res > tol:
        return []
    admissible = uniform_admissible(params, tol)
    if require_admissible and not admissible:
        return []
    return [ConditionMatch("uniform", m, n, res, admissible)]


def ghz_param_check(params: CouplerParams) -> ConditionMatch:
    res = max(
        abs(params.delta_beta + params.c3),
        abs(params.c1 - params.c2),
        abs(params.c2 - params.c3),
    )
    return ConditionMatch("ghz", None, None, float(res), res == 0.0)


def weak_coupling_ratios(params: CouplerParams, z: float) -> np.ndarray:
    """Predicted leakage ratios ``|Psi_100|^2/|Psi_000|^2`` (and 010, 001).

    Uses the small-coupling estimate ``C_i^2 z^2 / (4 + dbeta^2 z^2)``.
    """
    if z <= 0:
        raise ValueError("z must be > 0")
    c = np.array(params.couplings)
    return c**2 * z**2 / (4.0 + (params.delta_beta * z) ** 2)


def weak_coupling_ratios_first_order(params: CouplerParams, z: float) -> np.ndarray:
    """First-order perturbative leakage ratios, exact in ``dbeta*z``.

    One hop from ``|000>`` gives
    ``C_i^2 z^2 |(w e^w - (e^w - 1)) / w|^2 / |e^w - 1|^2`` with
    ``w = -i dbeta z``; it reduces to ``C_i^2 z^2 / 4`` at ``dbeta = 0``.
    """
    if z <= 0:
        raise ValueError("z must be > 0")
    w = -1j * params.delta_beta * z
    if abs(w) < 1e-4:
        factor = (0.5 + w / 3.0) / (1.0 + w / 2.0)
    else:
        em1 = np.expm1(w)
        factor = (w * np.exp(w) - em1) / (w * em1)
    c = np.array(params.couplings)
    return c**2 * z**2 * abs(factor) ** 2


def branch_probabilities(p: np.ndarray) -> dict[str, float]:
    """Per-state probability on the three symmetric branches (C1 = C2, equal pumps)."""
    p = np.asarray(p, dtype=float)
    return {
        "000,111": float(np.mean(p[[0, 7]])),
        "001,110": float(np.mean(p[[3, 4]])),
        "010,101,100,011": float(np.mean(p[[1, 2, 5, 6]])),
    }


def probability_table(state) -> dict[str, float]:
    p = np.abs(_vector(state)) ** 2
    return dict(zip(BASIS_LABELS, map(float, p)))
