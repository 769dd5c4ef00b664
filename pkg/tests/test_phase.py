import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becphase.approx import joint_probability_lambda
from becphase.model import DetectionRecord, DetectionSpec, DoubleFockState, ModePair, PhaseState, SpatialMode
from becphase.phase import density_matrix_phase, lambda_average, outcome_prob_phase, z_spin_expectation

from conftest import angles, etas

MODES = ModePair(SpatialMode.plane_wave(0.6, 1.2), SpatialMode.gaussian(0.0, 4.0, 0.8))


def test_unequal_numbers_aligned_angle():
    pp, pm = outcome_prob_phase(PhaseState(0.0, 3, 1), DetectionSpec(0.0, 0.0))
    assert pp == pytest.approx(0.5 * (1 + math.sqrt(3) / 2), abs=1e-12)
    assert pp + pm == 1.0


def test_opposite_angle_is_certain_minus():
    pp, _ = outcome_prob_phase(PhaseState(0.7, 50, 50), DetectionSpec(0.0, 0.7 + math.pi))
    assert pp == pytest.approx(0.0, abs=1e-15)


@given(lam=angles, phi=angles, r=st.floats(-3, 3))
def test_probability_from_density_matrix(lam, phi, r):
    state = PhaseState(lam, 40, 10, MODES)
    W = density_matrix_phase(state, r)
    expected = 0.5 * (1 + 2 * (W.matrix[0, 1] * np.exp(1j * phi)).real / W.trace)
    assert outcome_prob_phase(state, DetectionSpec(r, phi))[0] == pytest.approx(expected, abs=1e-12)


@given(lam=angles, r=st.floats(-3, 3))
def test_density_matrix_is_pure_projector(lam, r):
    W = density_matrix_phase(PhaseState(lam, 7, 3, MODES), r)
    assert W.is_hermitian()
    assert abs(W.determinant) < 1e-9 * W.trace ** 2
    assert np.trace(W.normalized()).real == pytest.approx(1.0)


def test_z_spin_same_for_both_state_kinds():
    assert z_spin_expectation(PhaseState(1.0, 30, 10), 0.0) == pytest.approx(0.5)
    assert z_spin_expectation(DoubleFockState(30, 10), 0.0) == pytest.approx(0.5)


@given(phis=st.lists(angles, min_size=1, max_size=10), data=st.data())
def test_phase_average_equals_approx_engine(phis, data):
    es = data.draw(st.lists(etas, min_size=len(phis), max_size=len(phis)))
    recs = [DetectionRecord(DetectionSpec(0.5 * j, p), e) for j, (p, e) in enumerate(zip(phis, es))]
    fock = DoubleFockState(2000, 500, MODES)
    assert lambda_average(PhaseState(0.0, 2000, 500, MODES), recs) == pytest.approx(
        joint_probability_lambda(fock, recs), abs=1e-14)
