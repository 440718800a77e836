import math

import numpy as np
import pytest

from biphoton import optics
from biphoton.optics import (BIT_FLIP, C_LIGHT, H, HWP2_MAP, PATH_I, PATH_II, V,
                             BiphotonState, OpticsError, PostSelectionError, Term,
                             apply_bd_merge, apply_bd_split, apply_jones, apply_quartz,
                             bell_state, gaussian_characteristic, hwp_jones,
                             measurement_apparatus, product_state, propagate, reduce)
from biphoton.oracle import numeric_characteristic
from biphoton.qmath import HADAMARD, SIGMA_Z
from biphoton.states import bell_density, concurrence

R2 = 1 / math.sqrt(2)


def test_bell_state_terms():
    s = bell_state()
    assert [(t.amp, t.pol_a, t.pol_b, t.path_a, t.path_b, t.delay_a, t.delay_b) for t in s] == [
        (R2, H, H, PATH_I, PATH_I, 0.0, 0.0), (R2, V, V, PATH_I, PATH_I, 0.0, 0.0)]
    assert s.norm2() == pytest.approx(1.0, abs=1e-15)


def test_bell_reduces_to_projector(spectrum):
    rho, p = reduce(bell_state(), spectrum, spectrum)
    assert rho.allclose(bell_density(), atol=1e-15)
    assert p == pytest.approx(1.0, abs=1e-15)
    assert concurrence(rho) == pytest.approx(1.0, abs=1e-12)


def test_quartz_zero_thickness_is_identity():
    assert apply_quartz(bell_state(), "b", 0, 0.01).isclose(bell_state())


def test_quartz_delays_only_v():
    s = apply_quartz(bell_state(), "b", 195, 0.01)
    hh, vv = s.terms
    assert hh.delay_b == 0.0 and hh.delay_a == 0.0
    assert vv.delay_b == pytest.approx(195 * 800e-9 * 0.01 / C_LIGHT, rel=1e-15)
    assert vv.delay_a == 0.0
    assert (hh.amp, vv.amp) == (R2, R2)


def test_quartz_additivity(spectrum):
    two = apply_quartz(apply_quartz(bell_state(), "b", 12345.0, 0.01), "b", 6789.0, 0.01)
    one = apply_quartz(bell_state(), "b", 12345.0 + 6789.0, 0.01)
    assert two.isclose(one)
    r2, _ = reduce(two, spectrum, spectrum)
    r1, _ = reduce(one, spectrum, spectrum)
    assert np.max(np.abs(r1.m - r2.m)) < 1e-12


def test_quartz_rejects_bad_parameters():
    with pytest.raises(OpticsError):
        apply_quartz(bell_state(), "b", -1, 0.01)
    with pytest.raises(OpticsError):
        apply_quartz(bell_state(), "b", 1, 1.5)
    with pytest.raises(OpticsError):
        apply_quartz(bell_state(), "c", 1, 0.01)


def test_hadamard_twice_is_identity():
    s = apply_jones(apply_jones(bell_state(), "a", HADAMARD), "a", HADAMARD)
    assert s.isclose(bell_state())


def test_bit_flip_on_b():
    s = apply_jones(bell_state(), "b", BIT_FLIP)
    expected = BiphotonState([Term(R2, H, V), Term(R2, V, H)])
    assert s.isclose(expected)


def test_hadamard_on_b_of_hh():
    s = apply_jones(product_state(H, H), "b", HADAMARD)
    assert s.isclose(BiphotonState([Term(R2, H, H), Term(R2, H, V)]))


def test_hwp_at_22_5_is_hadamard():
    assert np.allclose(hwp_jones(22.5), HADAMARD, atol=1e-15)


def test_hwp2_map_action():
    plus = np.array([1, 1]) * R2
    minus = np.array([1, -1]) * R2
    assert np.allclose(HWP2_MAP @ [1, 0], plus)
    assert np.allclose(HWP2_MAP @ [0, 1], -minus)


def test_split_routes_v_to_path_ii():
    s = apply_bd_split(bell_state(), "b")
    hh, vv = s.terms
    assert (hh.path_a, hh.path_b) == (PATH_I, PATH_I)
    assert (vv.path_a, vv.path_b) == (PATH_I, PATH_II)
    assert s.norm2() == pytest.approx(1.0, abs=1e-15)


def test_nested_split_is_rejected():
    with pytest.raises(OpticsError):
        apply_bd_split(apply_bd_split(bell_state(), "b"), "b")


def test_split_swap_merge_swap_is_lossless():
    # identical displacers only recombine once H and V are exchanged between them
    s = apply_bd_split(bell_state(), "b")
    s = apply_jones(s, "b", BIT_FLIP)
    s = apply_bd_merge(s, "b")
    s = apply_jones(s, "b", BIT_FLIP)
    assert s.isclose(bell_state())
    assert s.norm2() == pytest.approx(1.0, abs=1e-15)


def test_merge_dark_ports_discard():
    dark = BiphotonState([Term(1.0, H, H, PATH_I, PATH_I), Term(1.0, V, V, PATH_I, PATH_II)])
    assert len(apply_bd_merge(dark, "b")) == 0
    bright = BiphotonState([Term(1.0, H, V, PATH_I, PATH_I), Term(1.0, V, H, PATH_I, PATH_II)])
    out = apply_bd_merge(bright, "b")
    assert len(out) == 2 and all(t.path_b == PATH_I for t in out)


def test_apparatus_without_second_plate_is_identity():
    s = propagate(bell_state(), measurement_apparatus("b", 0, 0.01))
    assert s.isclose(bell_state())
    arbitrary = BiphotonState([Term(0.6, H, H), Term(0.48j, H, V), Term(0.64, V, V)])
    assert propagate(arbitrary, measurement_apparatus("b", 0, 0.01)).isclose(arbitrary)


def test_unitary_elements_preserve_norm(spectrum, rng):
    s = bell_state()
    for el in [optics.QuartzPlate("b", 19500, 0.01), optics.HalfWavePlate("a", 17.0),
               optics.BeamDisplacerSplit("a"), optics.QuartzPlate("a", 3000, 0.01)]:
        s = el.apply(s)
        assert s.norm2() == pytest.approx(1.0, abs=1e-12)


def test_reduce_requires_merged_paths(spectrum):
    with pytest.raises(OpticsError):
        reduce(apply_bd_split(bell_state(), "b"), spectrum, spectrum)


def test_reduce_post_selected_away(spectrum):
    dark = BiphotonState([Term(1.0, H, H, PATH_I, PATH_I)])
    with pytest.raises(PostSelectionError):
        reduce(apply_bd_merge(dark, "b"), spectrum, spectrum)


def test_physical_hwp2_matches_up_to_local_phase(spectrum):
    stated = measurement_apparatus("b", 25000, 0.01)
    physical = measurement_apparatus("b", 25000, 0.01, hwp2=hwp_jones(-22.5))
    s0 = apply_quartz(bell_state(), "b", 19500, 0.01)
    r1, p1 = reduce(propagate(s0, stated), spectrum, spectrum)
    r2, p2 = reduce(propagate(s0, physical), spectrum, spectrum)
    z = np.kron(SIGMA_Z, np.eye(2))
    assert np.max(np.abs(z @ r2.m @ z - r1.m)) < 1e-12
    assert p1 == pytest.approx(p2, abs=1e-12)
    assert concurrence(r1) == pytest.approx(concurrence(r2), abs=1e-12)


# -- characteristic function -------------------------------------------------

def test_characteristic_at_zero(spectrum):
    assert gaussian_characteristic(0.0, spectrum) == 1 + 0j


def test_characteristic_magnitude_and_phase(spectrum):
    # delay with sigma*delay = 4 nudged so that omega0*delay is a multiple of 2 pi
    m = round(4 / spectrum.sigma * spectrum.omega0 / (2 * math.pi))
    da = 2 * math.pi * m / spectrum.omega0
    k = gaussian_characteristic(da, spectrum)
    expected_mag = math.exp(-(da * spectrum.sigma) ** 2 / 16)
    assert abs(k) == pytest.approx(expected_mag, rel=1e-12)
    assert abs(da * spectrum.sigma - 4) < 1e-2
    assert abs(math.atan2(k.imag, k.real)) < 1e-9
    assert numeric_characteristic(da, spectrum) == pytest.approx(k, abs=1e-12)


def test_characteristic_conjugate_symmetry(spectrum):
    for x in (0.3, 2.0, 7.5):
        da = x / spectrum.sigma
        assert gaussian_characteristic(-da, spectrum) == pytest.approx(
            gaussian_characteristic(da, spectrum).conjugate(), abs=1e-15)


def test_characteristic_magnitude_monotone(spectrum):
    xs = np.linspace(0, 20, 400) / spectrum.sigma
    mags = [abs(gaussian_characteristic(x, spectrum)) for x in xs]
    assert all(a > b for a, b in zip(mags, mags[1:]))


def test_single_arm_dephasing_matrix(spectrum):
    s = apply_quartz(bell_state(), "b", 19500, 0.01)
    rho, p = reduce(s, spectrum, spectrum)
    kb = gaussian_characteristic(19500 * 800e-9 * 0.01 / C_LIGHT, spectrum)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = expected[3, 3] = 0.5
    expected[0, 3], expected[3, 0] = kb.conjugate() / 2, kb / 2
    assert np.max(np.abs(rho.m - expected)) < 1e-15
    assert p == pytest.approx(1.0)
