import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recoilsim.errors import (ConfigurationError, NoFringeError, PhysicsError)
from recoilsim.fringes import (CoherenceEnvelope, GridSpec, contrast,
                               extract_spacing, ramsey_scan, scan_minimum_near,
                               synthesize)
from recoilsim.params import rb87


@pytest.fixture(scope="module")
def atom():
    return rb87()


def equal_arms(*momenta):
    amp = 1 / math.sqrt(len(momenta))
    return [(amp, nz, nx) for nz, nx in momenta]


def test_two_arm_spacing_is_wavelength_over_dn(atom):
    # oracle: two plane waves separated by dn recoils beat with period
    # lambda/dn
    pattern = synthesize(equal_arms((0, 0), (94, 0)), GridSpec(), atom)
    est = extract_spacing(pattern, "z")
    expected = atom.lattice_wavelength / 94
    assert abs(est.period - expected) <= est.bin_uncertainty
    assert expected == pytest.approx(8.30e-9, abs=0.01e-9)


@pytest.mark.parametrize("dn", [2, 10, 50, 94, 100, 190])
def test_fourier_consistency_across_separations(atom, dn):
    n = 4096
    pitch = 0.25e-9 if dn >= 10 else 2e-9
    grid = GridSpec(dims=1, pitch=pitch, shape=(n,))
    pattern = synthesize(equal_arms((0, 0), (dn, 0)), grid, atom)
    est = extract_spacing(pattern, "z")
    assert abs(est.period - atom.lattice_wavelength / dn) <= est.bin_uncertainty


def test_single_arm_flat_and_no_fringe_error(atom):
    pattern = synthesize([(1.0, 0, 0)], GridSpec(), atom)
    assert pattern.samples.max() == pytest.approx(1.0)
    assert pattern.samples.min() == pytest.approx(1.0)
    with pytest.raises(NoFringeError):
        extract_spacing(pattern, "z")
    assert contrast(pattern) == pytest.approx(0.0, abs=1e-12)


def test_mixed_internal_levels_rejected(atom):
    class FakeArm:
        def __init__(self, level, nz):
            self.amplitude = 1 / math.sqrt(2)
            self.kinetic_phase = 0.0
            self.n_z = nz
            self.n_x = 0
            self.level = level

    from recoilsim.params import InternalLevel
    arms = [FakeArm(InternalLevel.A, 0), FakeArm(InternalLevel.C, 94)]
    with pytest.raises(PhysicsError):
        synthesize(arms, GridSpec(), atom)


def test_grid_must_span_ten_periods(atom):
    small = GridSpec(dims=1, pitch=0.25e-9, shape=(64,))
    with pytest.raises(ConfigurationError):
        synthesize(equal_arms((0, 0), (94, 0)), small, atom)


def test_grid_must_resolve_sixteen_samples_per_period(atom):
    coarse = GridSpec(dims=1, pitch=2e-9, shape=(4096,))
    with pytest.raises(ConfigurationError):
        synthesize(equal_arms((0, 0), (94, 0)), coarse, atom)


def commensurate_grid(atom, dn, samples_per_period=64, periods=64):
    """Grid whose samples land exactly on the fringe extrema."""
    pitch = atom.lattice_wavelength / (dn * samples_per_period)
    return GridSpec(dims=1, pitch=pitch,
                    shape=(samples_per_period * periods,))


def test_two_arm_contrast_unity(atom):
    grid = commensurate_grid(atom, 50)
    pattern = synthesize(equal_arms((0, 0), (50, 0)), grid, atom)
    assert contrast(pattern) == pytest.approx(1.0, abs=1e-9)


def test_unbalanced_contrast_formula(atom):
    arms = [(math.sqrt(0.8), 0, 0, 0.0), (math.sqrt(0.2), 50, 0, 0.0)]
    pattern = synthesize(arms, commensurate_grid(atom, 50), atom)
    assert contrast(pattern) == pytest.approx(0.8, abs=1e-6)


@given(p1=st.floats(0.05, 0.95))
@settings(max_examples=30, deadline=None)
def test_contrast_matches_two_wave_formula(p1):
    atom = rb87()
    p2 = 1 - p1
    arms = [(math.sqrt(p1), 0, 0, 0.0), (math.sqrt(p2), 40, 0, 0.0)]
    pattern = synthesize(arms, commensurate_grid(atom, 40), atom)
    expected = 2 * math.sqrt(p1 * p2) / (p1 + p2)
    assert contrast(pattern) == pytest.approx(expected, abs=1e-6)


def test_four_arm_lattice_spacings(atom):
    arms = equal_arms((-48, -96), (-48, 94), (46, -96), (46, 94))
    pattern = synthesize(arms, GridSpec.default_2d(), atom)
    est_z = extract_spacing(pattern, "z")
    est_x = extract_spacing(pattern, "x")
    lam = atom.lattice_wavelength
    assert abs(est_z.period - lam / 94) <= est_z.bin_uncertainty
    assert abs(est_x.period - lam / 190) <= est_x.bin_uncertainty
    # round-number estimates at the nominal 800 nm: 100/P and 100/Q
    assert est_z.period == pytest.approx(100e-9 / 12, rel=0.1)
    assert est_x.period == pytest.approx(100e-9 / 24, rel=0.1)


def test_arm_phase_shifts_pattern_not_spacing(atom):
    base = synthesize(equal_arms((0, 0), (94, 0)), GridSpec(), atom)
    shifted = synthesize([(1 / math.sqrt(2), 0, 0, 0.0),
                          (1 / math.sqrt(2), 94, 0, 1.0)], GridSpec(), atom)
    assert extract_spacing(base, "z").period == \
        extract_spacing(shifted, "z").period
    assert contrast(base) == pytest.approx(contrast(shifted), abs=1e-5)
    assert not np.allclose(base.samples, shifted.samples)


def test_coherence_envelope_counts_enough_periods():
    env = CoherenceEnvelope()
    assert env.length == pytest.approx(300e-6)
    assert env.periods_within(8e-9) > 1e4


def test_envelope_limits_fringe_field(atom):
    env = CoherenceEnvelope(length=100e-9)  # absurdly short, visible in grid
    grid = GridSpec(dims=1, pitch=0.25e-9, shape=(4096,))
    pattern = synthesize(equal_arms((0, 0), (94, 0)), grid, atom, env)
    z = pattern.axis_coordinates(0)
    outside = pattern.samples[np.abs(z) > 5 * env.length]
    assert outside.max() < 1e-3


class AnalyticRamsey:
    """Closed-form two-path stand-in for scan analysis tests."""

    def __init__(self, tau, phase=0.0):
        self.tau = tau
        self.phase = phase

    def pc_of(self, delta):
        return math.sin((delta * self.tau + self.phase) / 2) ** 2


def test_scan_measures_period_and_widths():
    tau = 0.102
    scan = ramsey_scan(AnalyticRamsey(tau), periods=3.2,
                       points_per_period=100)
    assert scan.fringe_period_hz == pytest.approx(1 / tau, abs=0.02)
    assert scan.width_scale_hz == pytest.approx(1 / (2 * math.pi * tau),
                                                abs=0.005)
    assert scan.populations.min() < 1e-4


def test_scan_phase_shift_mapping():
    # a constant phase on one arm moves the pattern by phi/2pi periods
    tau = 0.05
    phi = 1.3
    base = ramsey_scan(AnalyticRamsey(tau), points_per_period=200)
    moved = ramsey_scan(AnalyticRamsey(tau, phase=phi), points_per_period=200)
    m0 = scan_minimum_near(base, 0.0)
    m1 = scan_minimum_near(moved, 0.0)
    expected = phi / (2 * math.pi) * base.fringe_period_hz
    assert abs(m1 - m0) == pytest.approx(expected, rel=0.01)


def test_scan_grid_preconditions():
    with pytest.raises(ConfigurationError):
        ramsey_scan(AnalyticRamsey(0.1), periods=2.0)
    with pytest.raises(ConfigurationError):
        ramsey_scan(AnalyticRamsey(0.1), points_per_period=10)


def test_scan_doubled_tau_halves_width():
    s1 = ramsey_scan(AnalyticRamsey(0.05))
    s2 = ramsey_scan(AnalyticRamsey(0.10))
    assert s2.width_scale_hz == pytest.approx(s1.width_scale_hz / 2, rel=0.02)
