"""Domain types and the rotating-frame linear system for two coupled waveguides.

Basis states are ordered ``[000, 100, 010, 001, 110, 101, 011, 111]`` where
the digits give the waveguide (0 or 1) of photons 1, 2 and 3.  Every array of
eight amplitudes or probabilities in this package uses that ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

BASIS_LABELS: tuple[str, ...] = ("000", "100", "010", "001", "110", "101", "011", "111")
BASIS: tuple[tuple[int, int, int], ...] = tuple(
    tuple(int(ch) for ch in label) for label in BASIS_LABELS
)

# Sign patterns (s1, s2, s3) for the diagonal ordering
# {lbar-ld, la, lb, lbar-lc, lc, lbar-lb, lbar-la, ld}.
SIGN_PATTERNS: tuple[tuple[int, int, int], ...] = (
    (-1, -1, -1),
    (+1, -1, -1),
    (-1, +1, -1),
    (+1, +1, -1),
    (-1, -1, +1),
    (+1, -1, +1),
    (-1, +1, +1),
    (+1, +1, +1),
)

# Positions of the a, b, c, d modes inside the diagonal ordering.
MODE_POSITIONS = {"a": 1, "b": 2, "c": 4, "d": 7}

FRAMES = ("rotating", "lab")

_SINC_SERIES_CUTOFF = 1e-4


def basis_position(l: int, m: int, n: int) -> int:
    """Linear position of ``|l m n>`` in the fixed ordering."""
    return BASIS.index((l, m, n))


def _flip_matrix(photon: int) -> np.ndarray:
    """Permutation matrix that flips the waveguide index of one photon."""
    out = np.zeros((8, 8))
    for i, idx in enumerate(BASIS):
        flipped = list(idx)
        flipped[photon] = 1 - flipped[photon]
        out[i, BASIS.index(tuple(flipped))] = 1.0
    return out


FLIP_MATRICES: tuple[np.ndarray, ...] = tuple(_flip_matrix(k) for k in range(3))


def _sign_transform() -> np.ndarray:
    rows = []
    for s in SIGN_PATTERNS:
        rows.append([s[0] ** l * s[1] ** m * s[2] ** n for (l, m, n) in BASIS])
    return np.array(rows, dtype=float) / (2.0 * math.sqrt(2.0))


# Rows are the eigenvectors of the coupling matrix, in diagonal order.
# Orthogonal, so the inverse is the transpose.
SIGN_TRANSFORM: np.ndarray = _sign_transform()


def _as_complex(value) -> complex:
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(value)


@dataclass(frozen=True)
class CouplerParams:
    """Physical knobs of the nonlinear directional coupler.

    Rates are per unit propagation distance; the default device length is
    ``2*pi``.
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    delta_beta: float = 0.0
    gamma: float = 1.0
    a0: complex = 1.0
    a1: complex = 1.0
    length: float = TWO_PI

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "delta_beta", "gamma", "length"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("a0", "a1"):
            value = _as_complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("c1", "c2", "c3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.length <= 0:
            raise ValueError(f"length must be > 0, got {self.length}")

    @property
    def couplings(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    @property
    def symmetric_pump(self) -> bool:
        return abs(self.a0 - self.a1) <= 1e-12

    def replace(self, **changes) -> "CouplerParams":
        data = self.to_dict()
        data.update(changes)
        return CouplerParams(**data)

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "delta_beta": self.delta_beta,
            "gamma": self.gamma,
            "a0": self.a0,
            "a1": self.a1,
            "length": self.length,
        }


@dataclass(frozen=True)
class TripletAmplitudes:
    """Eight complex amplitudes of the photon-triplet wavefunction."""

    amps: np.ndarray
    frame: str = "rotating"

    def __post_init__(self):
        arr = np.array(self.amps, dtype=complex).reshape(-1)
        if arr.shape != (8,):
            raise ValueError(f"expected 8 amplitudes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite")
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "amps", arr)

    def __getitem__(self, label: str) -> complex:
        return complex(self.amps[BASIS_LABELS.index(label)])

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def to_frame(self, frame: str, params: CouplerParams, z: float) -> "TripletAmplitudes":
        """Convert between rotating and lab frame at position ``z``.

        lab = rotating * exp(i*delta_beta*z).
        """
        if frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
        if frame == self.frame:
            return self
        phase = np.exp(1j * params.delta_beta * z)
        if frame == "lab":
            return TripletAmplitudes(self.amps * phase, "lab")
        return TripletAmplitudes(self.amps / phase, "rotating")


@dataclass(frozen=True)
class Spectrum:
    lambda_a: float
    lambda_b: float
    lambda_c: float
    lambda_d: float
    lambda_bar: float
    diag: np.ndarray = field(repr=False)

    @property
    def modes(self) -> dict[str, float]:
        return {"a": self.lambda_a, "b": self.lambda_b, "c": self.lambda_c, "d": self.lambda_d}


def effective_phase_mismatch(
    beta_p: float,
    beta_tilde: Sequence[float],
    couplings: Sequence[float],
    k_perp: Sequence[float],
) -> float:
    """Pump propagation constant minus the three discretely-diffracted photon constants."""
    total = beta_p
    for bt, c, k in zip(beta_tilde, couplings, k_perp, strict=True):
        total -= bt + 2.0 * c * math.cos(k)
    return float(total)


def sinc(x):
    """Unnormalized sinc, ``sin(x)/x``, with a series guard near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def phase_match_profile(delta_beta: float, z) -> complex | np.ndarray:
    """``sinc(delta_beta*z/2) * exp(-i*delta_beta*z/2)``.

    Accepts a scalar or array ``z``; ``z`` must be non-negative.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("z must be >= 0")
    half = 0.5 * delta_beta * z_arr
    out = sinc(half) * np.exp(-1j * half)
    return complex(out) if np.ndim(out) == 0 else out


def coupling_matrix(params: CouplerParams) -> np.ndarray:
    """Real symmetric 8x8 matrix of the rotating-frame system."""
    mat = -params.delta_beta * np.eye(8)
    for c, flip in zip(params.couplings, FLIP_MATRICES):
        mat = mat + c * flip
    return mat


def source_vector(params: CouplerParams) -> np.ndarray:
    vec = np.zeros(8, dtype=complex)
    vec[0] = params.gamma * params.a0
    vec[7] = params.gamma * params.a1
    return vec


def spectrum(params: CouplerParams) -> Spectrum:
    c1, c2, c3 = params.couplings
    db = params.delta_beta
    la = -db + c1 - c2 - c3
    lb = -db - c1 + c2 - c3
    lc = -db - c1 - c2 + c3
    ld = -db + c1 + c2 + c3
    lbar = 0.5 * (la + lb + lc + ld)
    diag = np.array([lbar - ld, la, lb, lbar - lc, lc, lbar - lb, lbar - la, ld])
    diag.setflags(write=False)
    return Spectrum(la, lb, lc, ld, lbar, diag)


def sign_pattern_eigenvalues(params: CouplerParams) -> np.ndarray:
    """Eigenvalues written as ``-delta_beta + s.C`` per sign pattern (diagonal order)."""
    c = np.array(params.couplings)
    return np.array([-params.delta_beta + float(np.dot(s, c)) for s in SIGN_PATTERNS])


def random_params(rng: np.random.Generator, c_max: float = 4.0, db_max: float = 6.0, **fixed) -> CouplerParams:
    """Draw couplings in (0, c_max] and delta_beta in [-db_max, db_max]."""
    c = c_max * (1.0 - rng.random(3))
    db = rng.uniform(-db_max, db_max)
    kwargs = dict(c1=c[0], c2=c[1], c3=c[2], delta_beta=db)
    kwargs.update(fixed)
    return CouplerParams(**kwargs)


def as_amplitudes(values: Iterable[complex] | TripletAmplitudes, frame: str = "rotating") -> TripletAmplitudes:
    if isinstance(values, TripletAmplitudes):
        return values
    return TripletAmplitudes(np.asarray(list(values), dtype=complex), frame)
