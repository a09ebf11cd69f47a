import math

import numpy as np
import pytest

from mzsim.circuit import Coupler, compose, coupler_unitary, mzi_network
from mzsim.errors import DimensionError
from mzsim.fock import PhotonWavepacket
from mzsim.interference import (
    InterferenceCurve,
    TwoPhotonInput,
    coincidence_probability,
    hom_dip_curve,
    noon_fringe_curve,
    singles_fringe_curve,
    standard_wavepacket_pair,
)
from mzsim.reference import coincidence_probability_reference

BALANCED = coupler_unitary(Coupler(0, 1, 0.5), 2)


def real_coupler(eta: float) -> np.ndarray:
    # alternative sign convention: real symmetric splitter
    r, t = math.sqrt(eta), math.sqrt(1.0 - eta)
    return np.array([[r, t], [t, -r]])


def test_hom_cancellation_perfect_overlap():
    photons = standard_wavepacket_pair(1.0)
    assert coincidence_probability(BALANCED, photons) < 1e-12


def test_coincidence_closed_form_vs_reference():
    # P = M (2 eta - 1)^2 + (1 - M)(eta^2 + (1-eta)^2)
    for eta in (0.0, 0.3, 0.5, 0.72, 1.0):
        u = coupler_unitary(Coupler(0, 1, eta), 2)
        for m in (0.0, 0.5, 0.872, 0.95, 1.0):
            photons = standard_wavepacket_pair(m)
            p = coincidence_probability(u, photons)
            closed = m * (2 * eta - 1) ** 2 + (1 - m) * (eta**2 + (1 - eta) ** 2)
            assert p == pytest.approx(closed, abs=1e-12)
            assert p == pytest.approx(coincidence_probability_reference(u, m), abs=1e-12)


def test_coincidence_requires_two_modes():
    photons = standard_wavepacket_pair(1.0)
    with pytest.raises(DimensionError):
        coincidence_probability(np.eye(3, dtype=complex), photons)


def test_dip_curve_shape_and_baseline():
    photons = standard_wavepacket_pair(1.0)
    delays = tuple(np.linspace(-900.0, 900.0, 61))
    curve = hom_dip_curve(0.5, photons, delays)
    p = np.asarray(curve.probabilities)
    # center of the dip at zero delay, far wings at the distinguishable level
    assert p[30] < 1e-12
    assert p[0] == pytest.approx(0.5, abs=1e-3)
    assert np.all((p >= 0.0) & (p <= 1.0))


def test_dip_curve_symmetry_exact():
    photons = standard_wavepacket_pair(0.95)
    delays = tuple(np.linspace(-600.0, 600.0, 41))
    curve = hom_dip_curve(0.5, photons, delays)
    p = np.asarray(curve.probabilities)
    assert np.array_equal(p, p[::-1])


def test_dip_visibility_equals_overlap():
    # V = (P_base - P_min)/P_base = M at a balanced coupler
    for m in (0.0, 0.5, 0.872, 0.95, 1.0):
        photons = standard_wavepacket_pair(m)
        p0 = coincidence_probability(BALANCED, photons)
        assert 1.0 - p0 / 0.5 == pytest.approx(m, abs=1e-12)


def test_dip_baseline_off_balance():
    # far from overlap the coincidence rate sits at eta^2 + (1-eta)^2
    photons = standard_wavepacket_pair(1.0)
    for eta in (0.3, 0.5, 0.6):
        curve = hom_dip_curve(eta, photons, (1e6,))
        assert curve.probabilities[0] == pytest.approx(
            eta**2 + (1 - eta) ** 2, abs=1e-12
        )


def test_noon_fringe_closed_form():
    # P(phi) = [(3 - M) + (1 + M) cos 2 phi]/4
    phases = np.linspace(0.0, 2.0 * math.pi, 41)
    for m in (0.0, 0.5, 0.872, 1.0):
        photons = standard_wavepacket_pair(m)
        curve = noon_fringe_curve(photons, phases)
        expected = ((3.0 - m) + (1.0 + m) * np.cos(2.0 * phases)) / 4.0
        assert np.allclose(curve.probabilities, expected, atol=1e-12)


def test_noon_fringe_contrast_law():
    for m in (0.0, 0.5, 0.872, 0.95, 1.0):
        photons = standard_wavepacket_pair(m)
        curve = noon_fringe_curve(photons, np.linspace(0, math.pi, 181))
        p = np.asarray(curve.probabilities)
        contrast = (p.max() - p.min()) / (p.max() + p.min())
        assert contrast == pytest.approx((1.0 + m) / (3.0 - m), abs=1e-10)


def test_noon_vs_reference_through_full_circuit():
    for m in (0.0, 0.7, 1.0):
        photons = standard_wavepacket_pair(m)
        for phi in np.linspace(0.0, 2.0 * math.pi, 13):
            u = compose(mzi_network(phi))
            p = coincidence_probability(u, photons)
            assert p == pytest.approx(coincidence_probability_reference(u, m), abs=1e-12)


def test_singles_fringe():
    phases = np.linspace(0.0, 2.0 * math.pi, 41)
    curve = singles_fringe_curve(0, phases)
    expected = (1.0 + np.cos(phases)) / 2.0
    assert np.allclose(curve.probabilities, expected, atol=1e-12)
    # the other input gives the complementary port probability
    curve1 = singles_fringe_curve(1, phases)
    assert np.allclose(
        np.asarray(curve.probabilities) + np.asarray(curve1.probabilities),
        np.full_like(phases, 1.0) + np.cos(phases),
        atol=1e-12,
    )


def test_singles_special_phases():
    assert singles_fringe_curve(0, (0.0,)).probabilities[0] == pytest.approx(1.0, abs=1e-12)
    assert singles_fringe_curve(0, (math.pi / 2,)).probabilities[0] == pytest.approx(
        0.5, abs=1e-12
    )


def test_frequency_doubling_discrete_fourier():
    # pair fringe lives at harmonic 2 of the phase, singles at harmonic 1
    phases = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    pair = np.asarray(noon_fringe_curve(standard_wavepacket_pair(1.0), phases).probabilities)
    singles = np.asarray(singles_fringe_curve(0, phases).probabilities)
    for signal, harmonic in ((pair, 2), (singles, 1)):
        spectrum = np.abs(np.fft.rfft(signal - signal.mean()))
        assert int(np.argmax(spectrum)) == harmonic


def test_convention_independence():
    # same observables under the real splitter sign convention
    photons = standard_wavepacket_pair(0.872)

    # dip probability, pointwise
    for eta in (0.3, 0.5, 0.7):
        u_i = coupler_unitary(Coupler(0, 1, eta), 2)
        p_i = coincidence_probability(u_i, photons)
        p_r = coincidence_probability(real_coupler(eta), photons)
        assert p_r == pytest.approx(p_i, abs=1e-12)

    # pair fringe through the interferometer, pointwise
    for phi in np.linspace(0.0, 2.0 * math.pi, 17):
        u_i = compose(mzi_network(phi))
        e = complex(math.cos(phi), math.sin(phi))
        u_r = real_coupler(0.5) @ np.diag([e, 1.0]) @ real_coupler(0.5)
        assert coincidence_probability(u_r, photons) == pytest.approx(
            coincidence_probability(u_i, photons), abs=1e-12
        )

    # singles outputs agree as an unordered pair at each phase
    for phi in np.linspace(0.0, 2.0 * math.pi, 17):
        u_i = compose(mzi_network(phi))
        e = complex(math.cos(phi), math.sin(phi))
        u_r = real_coupler(0.5) @ np.diag([e, 1.0]) @ real_coupler(0.5)
        probs_i = sorted((abs(u_i[0, 0]) ** 2, abs(u_i[1, 0]) ** 2))
        probs_r = sorted((abs(u_r[0, 0]) ** 2, abs(u_r[1, 0]) ** 2))
        assert probs_r == pytest.approx(probs_i, abs=1e-12)


def test_interference_curve_validation():
    with pytest.raises(ValueError):
        InterferenceCurve(settings=(0.0, 1.0), probabilities=(0.5,))
    with pytest.raises(ValueError):
        InterferenceCurve(settings=(0.0,), probabilities=(1.5,))


def test_two_photon_input_overlap():
    pair = TwoPhotonInput(
        PhotonWavepacket(830.0, 3.0, polarization_overlap=1.0),
        PhotonWavepacket(830.0, 3.0, delay_fs=100.0, polarization_overlap=0.95),
    )
    assert pair.overlap == pytest.approx(0.95 * 0.8857298282190834, rel=1e-9)
    assert pair.input_state.occupations == (1, 1)


def test_standard_pair_books_mismatch_on_one_photon():
    pair = standard_wavepacket_pair(0.7)
    assert pair.wavepacket_a.polarization_overlap == 1.0
    assert pair.wavepacket_b.polarization_overlap == pytest.approx(0.7)
    assert pair.overlap == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(ValueError):
        standard_wavepacket_pair(1.2)
