import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becphase.errors import ConfigError, ZeroAmplitude
from becphase.model import (
    DetectionRecord,
    DetectionSpec,
    DoubleFockState,
    ModePair,
    PhaseState,
    ScenarioConfig,
    SpatialMode,
    config_violations,
    grid_specs,
    local_densities,
    overlapping_pairs,
    validate_config,
    wrap_angle,
    xi,
)

from conftest import angles


def test_gaussian_and_plane_wave_values():
    g = SpatialMode.gaussian(1.0, 2.0, 3.0)
    assert g(1.0) == pytest.approx(3.0)
    assert abs(g(3.0)) == pytest.approx(3.0 * math.exp(-0.5))
    p = SpatialMode.plane_wave(2.0)
    assert p(0.25) == pytest.approx(np.exp(0.5j))


def test_region_indicator_is_zero_outside():
    m = SpatialMode.region_indicator([(0, 1), (2, 3)], 2.0)
    assert m(0.5) == 2.0 and m(1.5) == 0 and m(2.5) == 2.0
    with pytest.raises(ValueError):
        SpatialMode.region_indicator([(0, 2), (1, 3)])


def test_xi_of_equal_real_modes_is_zero():
    pair = ModePair(SpatialMode.uniform(), SpatialMode.uniform())
    assert xi(pair, 0.3) == 0.0


def test_xi_raises_where_a_mode_vanishes():
    pair = ModePair(SpatialMode.region_indicator([(0, 1)]), SpatialMode.uniform())
    with pytest.raises(ZeroAmplitude):
        xi(pair, 5.0)


@given(k=st.floats(-5, 5), r=st.floats(-10, 10))
def test_xi_antisymmetric_under_swap(k, r):
    pair = ModePair(SpatialMode.plane_wave(k), SpatialMode.gaussian(0.0, 3.0))
    total = xi(pair, r) + xi(pair.swapped(), r)
    assert min(total % (2 * math.pi), 2 * math.pi - total % (2 * math.pi)) < 1e-9


@given(delta=angles, r=st.floats(-3, 3))
def test_xi_shifts_with_global_phase_of_u(delta, r):
    pair = ModePair(SpatialMode.plane_wave(0.7), SpatialMode.uniform())
    shifted = ModePair(pair.u_a.with_phase(delta), pair.v_b)
    diff = wrap_angle(xi(shifted, r) - xi(pair, r) - delta)
    assert min(diff, 2 * math.pi - diff) < 1e-9


@given(x=st.floats(-1e6, 1e6))
def test_wrap_angle_range(x):
    y = wrap_angle(x)
    assert 0.0 <= y < 2 * math.pi


def test_phase_state_wraps_lambda():
    assert PhaseState(-0.5, 3, 3).lam == pytest.approx(2 * math.pi - 0.5)


def test_record_rejects_bad_eta():
    with pytest.raises(ValueError):
        DetectionRecord(DetectionSpec(0, 0), 0)


def test_local_densities_visibility_bound():
    st_ = DoubleFockState(30, 10, ModePair(SpatialMode.uniform(0.5), SpatialMode.uniform(2.0)))
    d_a, d_b, cross, _ = local_densities(st_, 0.0)
    assert cross <= d_a + d_b
    assert cross == pytest.approx(2 * math.sqrt(300) * 1.0)


def test_overlap_violation_names_pair():
    specs = (DetectionSpec(0.0, 0.0, 0.1), DetectionSpec(1.0, 0.0, 0.1), DetectionSpec(0.05, 0.0, 0.1))
    cfg = ScenarioConfig(DoubleFockState(5, 5), specs)
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    v = [x for x in err.value.violations if x.code == "OverlappingRegions"]
    assert len(v) == 1 and v[0].path == "specs[0],specs[2]"


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 2)), max_size=12))
def test_overlapping_pairs_matches_brute_force(raw):
    specs = [DetectionSpec(p, 0.0, w) for p, w in raw]
    brute = [(i, j) for i in range(len(specs)) for j in range(i + 1, len(specs))
             if specs[i].overlaps(specs[j])]
    assert overlapping_pairs(specs) == brute


def test_window_too_wide_for_narrow_gaussian():
    modes = ModePair(SpatialMode.gaussian(0.0, 0.01), SpatialMode.uniform())
    codes = [v.code for v in config_violations(
        ScenarioConfig(DoubleFockState(5, 5, modes), (DetectionSpec(0.01, 0.0, 0.01),)))]
    assert "WindowTooWide" in codes


@pytest.mark.parametrize("cfg, code", [
    (ScenarioConfig(DoubleFockState(0, 0)), "EmptyCondensate"),
    (ScenarioConfig(DoubleFockState(20, 20), grid_specs(3, 0, 2, 1e-3), engine="lambda_integral"),
     "SequenceTooLongForApproxEngine"),
    (ScenarioConfig(DoubleFockState(1, 0), grid_specs(2, 0, 2, 1e-3)), "CondensateExhausted"),
    (ScenarioConfig(DoubleFockState(5, 5), grid_specs(2, 0, 2, 1e-3), forced_etas=(1,)),
     "ForcedHistoryLength"),
    (ScenarioConfig(PhaseState(0.0, 5, 5)), "EngineStateMismatch"),
    (ScenarioConfig(DoubleFockState(5, 5), ensemble_size=0), "EmptyEnsemble"),
    (ScenarioConfig(DoubleFockState(5, 5), seed=2**64), "SeedOutOfRange"),
])
def test_config_violation_codes(cfg, code):
    assert code in [v.code for v in config_violations(cfg)]


def test_grid_specs_cycles_angles():
    specs = grid_specs(5, 0, 4, 1e-3, (0.0, 1.0))
    assert [s.angle for s in specs] == [0.0, 1.0, 0.0, 1.0, 0.0]
    assert [s.position for s in specs] == [0.0, 1.0, 2.0, 3.0, 4.0]
