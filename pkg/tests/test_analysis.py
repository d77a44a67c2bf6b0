import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import expm_oracle
from triplet_walk.analysis import (
    HBS_TARGET,
    IDEAL_STATES,
    NoTripletError,
    branch_probabilities,
    classify,
    density_matrix,
    fidelity,
    ghz_param_check,
    ghz_state,
    hbs_param_check,
    normalize,
    phase_free_fidelity,
    uniform_param_check,
    weak_coupling_ratios,
    weak_coupling_ratios_first_order,
)
from triplet_walk.core import CouplerParams, TripletAmplitudes, random_params
from triplet_walk.dynamics import analytic_state

TWO_PI = 2 * math.pi


def output(params):
    return normalize(analytic_state(params, params.length))[0]


def test_normalize_examples():
    e0 = TripletAmplitudes([1, 0, 0, 0, 0, 0, 0, 0])
    unit, norm = normalize(e0)
    assert norm == 1.0 and np.array_equal(unit.amps, e0.amps)
    unit, norm = normalize(TripletAmplitudes([2j, 0, 0, 0, 0, 0, 0, 2j]))
    assert norm == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    assert np.allclose(unit.amps[[0, 7]], 1j / math.sqrt(2), atol=1e-15)
    with pytest.raises(NoTripletError):
        normalize(TripletAmplitudes(np.zeros(8)))


def test_normalize_unit_to_machine_precision(rng):
    for _ in range(20):
        unit, _ = normalize(analytic_state(random_params(rng), TWO_PI))
        assert abs(unit.norm - 1) <= 1e-14


def test_density_matrix_examples():
    rho = density_matrix(TripletAmplitudes([1, 0, 0, 0, 0, 0, 0, 0])).rho
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    assert np.array_equal(rho, expected)
    rho = density_matrix(ghz_state()).rho
    for i, j in [(0, 0), (0, 7), (7, 0), (7, 7)]:
        assert rho[i, j] == pytest.approx(0.5, abs=1e-15)
    assert np.count_nonzero(np.abs(rho) > 1e-15) == 4


def test_density_matrix_hbs_block():
    rho = density_matrix(output(CouplerParams(1, 1, 2, delta_beta=-2))).rho
    block = [0, 3, 4, 7]
    mask = np.ones((8, 8), bool)
    mask[np.ix_(block, block)] = False
    assert np.max(np.abs(rho[mask])) <= 1e-9
    assert np.allclose(np.abs(rho[np.ix_(block, block)]), 0.25, atol=1e-12)


def test_density_matrix_rejects_non_unit():
    with pytest.raises(ValueError):
        density_matrix(np.ones(8))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_density_matrix_invariants(seed):
    dm = density_matrix(output(random_params(np.random.default_rng(seed))))
    assert dm.is_hermitian(1e-12)
    assert dm.trace == pytest.approx(1.0, abs=1e-12)
    assert dm.purity == pytest.approx(1.0, abs=1e-10)
    assert dm.eigenvalues().min() >= -1e-12


def test_fidelity_examples():
    ghz = ghz_state()
    e0 = TripletAmplitudes([1, 0, 0, 0, 0, 0, 0, 0])
    e1 = TripletAmplitudes([0, 1, 0, 0, 0, 0, 0, 0])
    assert fidelity(ghz, ghz) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(e0, e1) == 0.0
    assert fidelity(output(CouplerParams(1, 1, 1, delta_beta=-1)), ghz) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(ValueError):
        fidelity(np.ones(8), ghz)


@settings(max_examples=40, deadline=None)
@given(a=st.integers(0, 2**32 - 1), b=st.integers(0, 2**32 - 1), theta=st.floats(-3, 3))
def test_fidelity_symmetric_and_phase_blind(a, b, theta):
    s = output(random_params(np.random.default_rng(a)))
    t = output(random_params(np.random.default_rng(b)))
    assert fidelity(s, t) == pytest.approx(fidelity(t, s), abs=1e-14)
    rotated = TripletAmplitudes(s.amps * np.exp(1j * theta))
    assert fidelity(s, rotated) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= fidelity(s, t) <= 1.0
    assert fidelity(s, t) <= phase_free_fidelity(s, t) + 1e-14


def test_classify_worked_cases():
    assert classify(output(CouplerParams(1, 1, 2, delta_beta=-2)), 1e-6).label == "HBS"
    assert classify(output(CouplerParams(1, 1, 2, delta_beta=0)), 1e-6).label == "uniform"
    report = classify(ghz_state(), 1e-6)
    assert report.label == "GHZ-like" and report.score == pytest.approx(1.0, abs=1e-15)


def test_classify_mirrored():
    mirrored = TripletAmplitudes(IDEAL_STATES["mirrored-HBS"] * np.array([1, 1j, -1, 1, 1, 1j, 1, 1]))
    report = classify(mirrored, 1e-6)
    assert report.label == "mirrored-HBS"
    assert report.score == pytest.approx(1.0, abs=1e-14)


def test_classify_ghz_like_output_needs_loose_tolerance():
    state = output(CouplerParams(1, 1, 1, delta_beta=-1))
    assert classify(state, 1e-3).label == "none"
    report = classify(state, 0.05)
    assert report.label == "GHZ-like"
    assert report.scores["GHZ-like"] == pytest.approx(0.75, abs=1e-12)


def test_classify_rejects_bad_input():
    with pytest.raises(ValueError):
        classify(np.ones(8))
    with pytest.raises(ValueError):
        classify(ghz_state(), 0.5)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_classified_probabilities_sum_to_one(seed):
    report = classify(output(random_params(np.random.default_rng(seed))))
    assert report.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    assert all(0.0 <= v <= 1.0 for v in report.scores.values())
    if report.label != "none":
        assert report.patterns[report.label]


def test_hbs_check_worked_case():
    matches = hbs_param_check(CouplerParams(1, 1, 2, delta_beta=-2))
    fam1 = [m for m in matches if m.family == "hbs1"]
    assert fam1 and (fam1[0].m, fam1[0].n, fam1[0].residual) == (8, 4, 0.0)
    assert {m.family for m in matches} == {"hbs1", "hbs2", "hbs3"}


def test_hbs_check_excludes_degenerate_ghz_point():
    assert hbs_param_check(CouplerParams(1, 1, 1, delta_beta=-1)) == []
    assert hbs_param_check(CouplerParams(1, 1, 1, delta_beta=-1), require_admissible=False) == []


def test_hbs_check_literal_family_without_bell_state():
    # C1 + C2 = 1 and C3 = -dbeta = 5/4 sits on the hbs1 lattice (m=5, n=2),
    # yet C1 != C2 and lambda_c = 3/2 keep the output far from a Bell state.
    params = CouplerParams(0.3, 0.7, 1.25, delta_beta=-1.25)
    literal = hbs_param_check(params, require_admissible=False)
    assert [(m.family, m.m, m.n, m.residual, m.admissible) for m in literal] == [("hbs1", 5, 2, 0.0, False)]
    assert hbs_param_check(params) == []
    assert classify(output(params), 1e-6).label != "HBS"


def test_hbs_check_residual_zero_gives_bell_state():
    hits = 0
    for m in range(1, 17):
        for n in range(1, 17):
            params = CouplerParams(n / 4, n / 4, m / 4, delta_beta=-m / 4)
            if not hbs_param_check(params):
                continue
            hits += 1
            raw = np.abs(analytic_state(params, TWO_PI).amps) ** 2
            assert np.all(raw[[1, 2, 5, 6]] <= 1e-18)
            p = raw / raw.sum()
            assert np.allclose(p[[0, 3, 4, 7]], 0.25, atol=1e-9)
    assert hits > 50


@pytest.mark.parametrize(
    "c, db, expected",
    [((1, 1, 2), 0.0, (2, 2)), ((0.5, 1, 1.5), 0.0, (2, 1)), ((0.5, 0.5, 1.0), 0.0, (1, 1))],
)
def test_uniform_check_matches(c, db, expected):
    (match,) = uniform_param_check(CouplerParams(*c, delta_beta=db))
    assert (match.m, match.n, match.residual) == (*expected, 0.0)
    p = output(CouplerParams(*c, delta_beta=db)).probabilities
    assert np.allclose(p, 1 / 8, atol=1e-9)


def test_uniform_check_rejects():
    assert uniform_param_check(CouplerParams(1, 1, 2, delta_beta=0.5)) == []
    # n = m = 0 is the uncoupled GHZ, not a uniform state
    assert uniform_param_check(CouplerParams(0, 0, 0, delta_beta=0)) == []


@pytest.mark.parametrize(
    "c, db, residual",
    [((1, 1, 1), -1, 0.0), ((1, 1, 2), -2, 1.0), ((2, 2, 2), -2, 0.0)],
)
def test_ghz_check(c, db, residual):
    assert ghz_param_check(CouplerParams(*c, delta_beta=db)).residual == residual


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8])
def test_ghz_closed_form(n):
    c = n / 4
    params = CouplerParams(c, c, c, delta_beta=-c)
    assert ghz_param_check(params).residual == 0
    p = output(params).probabilities
    assert p[0] == pytest.approx(3 / 8, abs=1e-9) and p[7] == pytest.approx(3 / 8, abs=1e-9)
    assert np.allclose(p[1:7], 1 / 24, atol=1e-9)


def test_weak_coupling_formula_examples():
    r = weak_coupling_ratios(CouplerParams(1e-3, 1e-3, 1e-3, delta_beta=0), TWO_PI)
    assert np.allclose(r, (1e-3 * TWO_PI) ** 2 / 4, rtol=1e-14)
    assert r[0] == pytest.approx(9.8696e-6, rel=1e-4)
    r = weak_coupling_ratios(CouplerParams(0, 0, 1e-3, delta_beta=1e-3), TWO_PI)
    assert r[0] == 0 and r[1] == 0 and r[2] > 0


def _full_ratios(params, z):
    q = np.abs(expm_oracle(params, z)) ** 2
    return q[1:4] / q[0]


def test_weak_coupling_formula_at_phase_matching():
    params = CouplerParams(1e-3, 2e-3, 3e-3, delta_beta=0.0)
    assert np.allclose(weak_coupling_ratios(params, TWO_PI), _full_ratios(params, TWO_PI), rtol=1e-3)


def test_first_order_ratios_track_mismatch():
    params = CouplerParams(1e-3, 2e-3, 3e-3, delta_beta=0.1)
    full = _full_ratios(params, TWO_PI)
    assert np.allclose(weak_coupling_ratios_first_order(params, TWO_PI), full, rtol=5e-3)
    small = CouplerParams(1e-4, 1e-4, 1e-4, delta_beta=0.1)
    assert np.allclose(weak_coupling_ratios_first_order(small, TWO_PI), _full_ratios(small, TWO_PI), rtol=1e-3)


def test_first_order_ratios_continuous_at_zero_mismatch():
    a = weak_coupling_ratios_first_order(CouplerParams(1e-3, 1e-3, 1e-3, delta_beta=0.0), TWO_PI)
    b = weak_coupling_ratios_first_order(CouplerParams(1e-3, 1e-3, 1e-3, delta_beta=2e-5), TWO_PI)
    c = weak_coupling_ratios_first_order(CouplerParams(1e-3, 1e-3, 1e-3, delta_beta=1e-3), TWO_PI)
    assert np.allclose(a, b, rtol=1e-8) and np.allclose(b, c, rtol=1e-5)


def test_branch_probabilities():
    branches = branch_probabilities(np.abs(HBS_TARGET) ** 2)
    assert branches == {"000,111": 0.25, "001,110": 0.25, "010,101,100,011": 0.0}
