import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import reference_matrix
from triplet_walk.core import (
    BASIS_LABELS,
    FLIP_MATRICES,
    SIGN_PATTERNS,
    SIGN_TRANSFORM,
    CouplerParams,
    TripletAmplitudes,
    basis_position,
    coupling_matrix,
    effective_phase_mismatch,
    phase_match_profile,
    sign_pattern_eigenvalues,
    sinc,
    source_vector,
    spectrum,
)

couplings = st.floats(0.0, 4.0, allow_nan=False)
mismatch = st.floats(-6.0, 6.0, allow_nan=False)


def test_basis_ordering():
    assert BASIS_LABELS == ("000", "100", "010", "001", "110", "101", "011", "111")
    assert basis_position(1, 1, 0) == 4
    assert basis_position(0, 1, 1) == 6


@pytest.mark.parametrize(
    "c, k, expected",
    [
        ((0, 0, 0), (0.3, 1.1, -2.0), 1.0),
        ((1, 1, 1), (0, 0, 0), -5.0),
        ((1, 1, 1), (math.pi / 2,) * 3, 1.0),
    ],
)
def test_effective_phase_mismatch(c, k, expected):
    assert effective_phase_mismatch(10.0, (3, 3, 3), c, k) == pytest.approx(expected, abs=1e-14)


def _quadrature_profile(db, z):
    re = quad(lambda s: math.cos(db * s), 0, z, epsabs=1e-14)[0]
    im = quad(lambda s: -math.sin(db * s), 0, z, epsabs=1e-14)[0]
    return complex(re, im) / z


def test_phase_match_examples():
    assert phase_match_profile(0.0, 5.0) == 1.0 + 0.0j
    assert abs(phase_match_profile(1.0, 2 * math.pi)) < 1e-16
    # sinc(pi/4) * exp(-i pi/4) = 2/pi * (1 - i)
    value = phase_match_profile(0.5, math.pi)
    assert value == pytest.approx(complex(2 / math.pi, -2 / math.pi), abs=1e-15)
    assert value == pytest.approx(_quadrature_profile(0.5, math.pi), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(db=mismatch, z=st.floats(0.01, 10.0))
def test_phase_match_against_quadrature(db, z):
    assert phase_match_profile(db, z) == pytest.approx(_quadrature_profile(db, z), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(db=mismatch, z=st.floats(0.0, 10.0))
def test_phase_match_properties(db, z):
    phi = phase_match_profile(db, z)
    assert abs(phi) <= 1.0 + 1e-15
    assert abs(phi) == pytest.approx(abs(sinc(db * z / 2)), abs=1e-15)
    assert phase_match_profile(-db, z) == pytest.approx(phi.conjugate(), abs=1e-15)


def test_sinc_guard_is_continuous():
    xs = np.array([0.0, 1e-12, 9.99e-5, 1.0001e-4, 1e-3])
    direct = np.array([1.0] + [math.sin(x) / x for x in xs[1:]])
    assert np.allclose(sinc(xs), direct, rtol=1e-15, atol=0)


def test_phase_match_rejects_negative_z():
    with pytest.raises(ValueError):
        phase_match_profile(1.0, -0.1)


def test_coupling_matrix_uncoupled():
    assert np.array_equal(coupling_matrix(CouplerParams(0, 0, 0, delta_beta=1.0)), -np.eye(8))


def test_coupling_matrix_layout():
    a = coupling_matrix(CouplerParams(1, 2, 3, delta_beta=0.0))
    p = basis_position
    assert a[p(0, 0, 0), p(1, 0, 0)] == 1
    assert a[p(0, 0, 0), p(0, 1, 0)] == 2
    assert a[p(0, 0, 0), p(0, 0, 1)] == 3
    assert a[p(0, 0, 0), p(1, 1, 0)] == 0


@settings(max_examples=50, deadline=None)
@given(c1=couplings, c2=couplings, c3=couplings, db=mismatch)
def test_coupling_matrix_matches_reference_layout(c1, c2, c3, db):
    params = CouplerParams(c1, c2, c3, delta_beta=db)
    a = coupling_matrix(params)
    assert np.array_equal(a, reference_matrix(params))
    flips = -db * np.eye(8) + c1 * FLIP_MATRICES[0] + c2 * FLIP_MATRICES[1] + c3 * FLIP_MATRICES[2]
    assert np.allclose(a, flips, atol=0, rtol=0)
    assert np.array_equal(a, a.T)
    assert np.allclose(a.sum(axis=1), -db + c1 + c2 + c3, atol=1e-12)


@pytest.mark.parametrize(
    "gamma, a0, a1, expected",
    [
        (1.0, 1.0, 1.0, [1, 0, 0, 0, 0, 0, 0, 1]),
        (0.0, 1.0, 1.0, [0] * 8),
        (2.0, 1.0, 1j, [2, 0, 0, 0, 0, 0, 0, 2j]),
    ],
)
def test_source_vector(gamma, a0, a1, expected):
    vec = source_vector(CouplerParams(gamma=gamma, a0=a0, a1=a1))
    assert np.array_equal(vec, np.array(expected, dtype=complex))


@pytest.mark.parametrize(
    "c, db, expected",
    [
        ((1, 1, 2), -2, (0, 0, 2, 6)),
        ((1, 1, 1), -1, (0, 0, 0, 4)),
        ((0, 0, 0), 0, (0, 0, 0, 0)),
    ],
)
def test_spectrum_examples(c, db, expected):
    sp = spectrum(CouplerParams(*c, delta_beta=db))
    assert (sp.lambda_a, sp.lambda_b, sp.lambda_c, sp.lambda_d) == expected


@settings(max_examples=60, deadline=None)
@given(c1=couplings, c2=couplings, c3=couplings, db=mismatch)
def test_spectrum_invariants(c1, c2, c3, db):
    params = CouplerParams(c1, c2, c3, delta_beta=db)
    sp = spectrum(params)
    assert sp.lambda_bar == pytest.approx(-2 * db, abs=1e-12)
    assert np.allclose(sp.diag, sign_pattern_eigenvalues(params), atol=1e-12)
    numeric = np.linalg.eigvalsh(coupling_matrix(params))
    assert np.allclose(np.sort(sp.diag), numeric, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(c1=couplings, c2=couplings, c3=couplings, db=mismatch)
def test_sign_transform_diagonalizes(c1, c2, c3, db):
    params = CouplerParams(c1, c2, c3, delta_beta=db)
    d = SIGN_TRANSFORM @ coupling_matrix(params) @ SIGN_TRANSFORM.T
    assert np.allclose(d, np.diag(spectrum(params).diag), atol=1e-12)


def test_sign_transform_orthogonal_and_ordered():
    assert np.allclose(SIGN_TRANSFORM @ SIGN_TRANSFORM.T, np.eye(8), atol=1e-15)
    assert SIGN_PATTERNS[-1] == (1, 1, 1)
    assert np.allclose(SIGN_TRANSFORM[-1], np.full(8, 1 / (2 * math.sqrt(2))))


@pytest.mark.parametrize(
    "kwargs",
    [dict(c1=-0.1), dict(length=0.0), dict(gamma=float("inf")), dict(delta_beta=float("nan")), dict(a0=complex("nan"))],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        CouplerParams(**kwargs)


def test_params_accept_re_im_pump():
    p = CouplerParams(a1={"re": 0.0, "im": 2.0})
    assert p.a1 == 2j
    assert p.length == pytest.approx(2 * math.pi)


def test_amplitudes_frame_round_trip():
    params = CouplerParams(delta_beta=0.7)
    amps = TripletAmplitudes(np.arange(8) + 1j, "rotating")
    lab = amps.to_frame("lab", params, 1.3)
    assert lab.frame == "lab"
    assert np.allclose(lab.probabilities, amps.probabilities)
    assert np.allclose(lab.to_frame("rotating", params, 1.3).amps, amps.amps)


def test_amplitudes_validation():
    with pytest.raises(ValueError):
        TripletAmplitudes(np.zeros(7))
    with pytest.raises(ValueError):
        TripletAmplitudes(np.zeros(8), frame="other")
    with pytest.raises(ValueError):
        TripletAmplitudes([np.inf] + [0] * 7)
