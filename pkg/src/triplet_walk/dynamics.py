"""Propagation of the triplet wavefunction along the coupler.

Two independent routes are provided: a closed-form solution built on the
sign-pattern eigenbasis of the coupling matrix, and a fixed-step classical
Runge-Kutta integrator of the coupled-mode equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    MODE_POSITIONS,
    SIGN_TRANSFORM,
    CouplerParams,
    TripletAmplitudes,
    coupling_matrix,
    phase_match_profile,
    source_vector,
    spectrum,
)

DEFAULT_STEPS = 4096
SYMMETRIC_PUMP_TOL = 1e-12


@dataclass(frozen=True)
class ModalCoefficients:
    phi: np.ndarray
    b_prime: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes sampled on an ascending z grid, lab frame."""

    z_grid: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z_grid, dtype=float)
        amps = np.asarray(self.amps, dtype=complex)
        if z.ndim != 1 or amps.shape != (z.size, 8):
            raise ValueError("amps must have shape (len(z_grid), 8)")
        if z.size and z[0] != 0.0:
            raise ValueError("z_grid must start at 0")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z_grid must be strictly increasing")
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "amps", amps)

    def __len__(self) -> int:
        return self.z_grid.size

    @property
    def states(self) -> list[TripletAmplitudes]:
        return [TripletAmplitudes(row, "lab") for row in self.amps]

    @property
    def final(self) -> TripletAmplitudes:
        return TripletAmplitudes(self.amps[-1], "lab")


def _check_z(z) -> np.ndarray:
    z_arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z_arr)) or np.any(z_arr < 0):
        raise ValueError(f"z must be finite and >= 0, got {z!r}")
    return z_arr


def modal_coefficients(params: CouplerParams, z: float) -> ModalCoefficients:
    """Eigenmode amplitudes ``Phi_j(z) = B'_j * z * phi(-lambda_j, z)``.

    The sinc form is used for every mode so that a vanishing eigenvalue needs
    no special case.
    """
    z = float(_check_z(z))
    b_prime = SIGN_TRANSFORM @ source_vector(params)
    lam = spectrum(params).diag
    phi = np.array([b * z * phase_match_profile(-l, z) for b, l in zip(b_prime, lam)])
    return ModalCoefficients(phi=phi, b_prime=b_prime)


def analytic_amplitudes(params: CouplerParams, z) -> np.ndarray:
    """Rotating-frame amplitudes on an array of z values, shape ``(len(z), 8)``."""
    z_arr = np.atleast_1d(_check_z(z))
    b_prime = SIGN_TRANSFORM @ source_vector(params)
    lam = spectrum(params).diag
    # phi(-lambda, z) = sinc(lambda z / 2) exp(i lambda z / 2)
    profile = np.stack([phase_match_profile(-l, z_arr) for l in lam], axis=-1)
    phi = z_arr[:, None] * profile * b_prime[None, :]
    return phi @ SIGN_TRANSFORM


def analytic_state(params: CouplerParams, z: float) -> TripletAmplitudes:
    """Closed-form rotating-frame state at distance ``z`` from a vacuum input."""
    coeffs = modal_coefficients(params, z)
    return TripletAmplitudes(SIGN_TRANSFORM.T @ coeffs.phi, "rotating")


def analytic_trajectory(params: CouplerParams, z_grid) -> Trajectory:
    """Closed-form solution sampled on ``z_grid``, converted to the lab frame."""
    z = np.asarray(z_grid, dtype=float)
    amps = analytic_amplitudes(params, z) * np.exp(1j * params.delta_beta * z)[:, None]
    return Trajectory(z, amps)


def symmetric_state(params: CouplerParams, z: float):
    """Four-mode solution for equal pump amplitudes.

    Returns ``(a, b, c, d, amps)`` where ``a..d`` are the modal coefficients
    belonging to ``lambda_a..lambda_d`` and ``amps`` is the rotating-frame
    state assembled from them.
    """
    if abs(params.a0 - params.a1) > SYMMETRIC_PUMP_TOL:
        raise ValueError(f"symmetric_state needs a0 == a1, got {params.a0} and {params.a1}")
    phi = modal_coefficients(params, z).phi
    a, b, c, d = (complex(phi[MODE_POSITIONS[k]]) for k in "abcd")
    s = 1.0 / (2.0 * math.sqrt(2.0))
    p000 = s * (a + b + c + d)
    p100 = s * (a - b - c + d)
    p010 = s * (-a + b - c + d)
    p001 = s * (-a - b + c + d)
    amps = np.array([p000, p100, p010, p001, p001, p010, p100, p000])
    return a, b, c, d, TripletAmplitudes(amps, "rotating")


def rk4_affine_step(generator: np.ndarray, source: np.ndarray, h: float):
    """One classical RK4 step for ``y' = K y + s`` (constant K, s) as ``y -> M y + v``.

    Expanding the four stages of the classical scheme for an autonomous linear
    system gives exactly ``M = sum_{k<=4} (hK)^k / k!`` and
    ``v = h * sum_{k<=3} (hK)^k / (k+1)! * s``.
    """
    x = h * generator
    eye = np.eye(generator.shape[0], dtype=complex)
    x2 = x @ x
    x3 = x2 @ x
    x4 = x3 @ x
    step = eye + x + x2 / 2.0 + x3 / 6.0 + x4 / 24.0
    shift = h * (eye + x / 2.0 + x2 / 6.0 + x3 / 24.0) @ source
    return step, shift


def rk4_fixed(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
    """Generic stage-by-stage classical RK4 over a given grid."""
    z_grid = np.asarray(z_grid, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((z_grid.size, y.size), dtype=complex)
    out[0] = y
    for i in range(z_grid.size - 1):
        z, h = z_grid[i], z_grid[i + 1] - z_grid[i]
        k1 = rhs(z, y)
        k2 = rhs(z + h / 2, y + h / 2 * k1)
        k3 = rhs(z + h / 2, y + h / 2 * k2)
        k4 = rhs(z + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return out


def _step_size(z_max: float, steps: int) -> float:
    if not (isinstance(steps, (int, np.integer)) and steps >= 1):
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    if not (math.isfinite(z_max) and z_max > 0):
        raise ValueError(f"z_max must be finite and > 0, got {z_max!r}")
    h = z_max / steps
    if h <= z_max * np.finfo(float).eps:
        raise ValueError(f"step size underflows: z_max={z_max}, steps={steps}")
    return h


def integrate_rk4(params: CouplerParams, z_max: float | None = None, steps: int = DEFAULT_STEPS) -> Trajectory:
    """Integrate the rotating-frame system ``dPsi/dz = iA Psi + B`` from vacuum.

    Samples are stored in the lab frame.
    """
    z_max = params.length if z_max is None else float(z_max)
    h = _step_size(z_max, steps)
    generator = 1j * coupling_matrix(params)
    step, shift = rk4_affine_step(generator, source_vector(params), h)
    z_grid = h * np.arange(steps + 1)
    z_grid[-1] = z_max
    out = np.empty((steps + 1, 8), dtype=complex)
    y = np.zeros(8, dtype=complex)
    out[0] = y
    for i in range(1, steps + 1):
        y = step @ y + shift
        out[i] = y
    out *= np.exp(1j * params.delta_beta * z_grid)[:, None]
    return Trajectory(z_grid, out)


def integrate_rk4_lab(params: CouplerParams, z_max: float | None = None, steps: int = DEFAULT_STEPS) -> Trajectory:
    """Integrate the lab-frame equations with the oscillating pump source directly."""
    z_max = params.length if z_max is None else float(z_max)
    h = _step_size(z_max, steps)
    hopping = 1j * (coupling_matrix(params) + params.delta_beta * np.eye(8))
    src = source_vector(params)
    db = params.delta_beta

    def rhs(z, y):
        return hopping @ y + src * np.exp(1j * db * z)

    z_grid = h * np.arange(steps + 1)
    z_grid[-1] = z_max
    return Trajectory(z_grid, rk4_fixed(rhs, np.zeros(8, dtype=complex), z_grid))


def trajectory_probabilities(traj: Trajectory) -> np.ndarray:
    return np.abs(traj.amps) ** 2
