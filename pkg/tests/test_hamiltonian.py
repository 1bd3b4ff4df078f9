import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recoilsim.basis import RecoilState, build_basis
from recoilsim.errors import ConfigurationError
from recoilsim.hamiltonian import (assemble, compile_epoch, dark_state,
                                   kinetic_term)
from recoilsim.params import InternalLevel, rb87
from recoilsim.pulses import (PulseEnvelope, PulseEvent, SQUARE,
                              copropagating_pulse, counter_intuitive_pair,
                              effective_pulse)

A, B, C, E1 = (InternalLevel.A, InternalLevel.B, InternalLevel.C,
               InternalLevel.E1)


@pytest.fixture(scope="module")
def atom():
    return rb87()


def sigma_event(pol, direction, peak=1e6, duration=1e-6):
    return PulseEvent(envelope=PulseEnvelope(SQUARE, peak, 0.0, duration),
                      polarization=pol, axis="z", direction=direction,
                      channel="adiabatic_lambda")


def test_kinetic_term_examples(atom):
    wr = atom.recoil_frequency
    assert kinetic_term(RecoilState(A, 0, 0), atom) == 0.0
    assert kinetic_term(RecoilState(A, -2, 0), atom) == pytest.approx(4 * wr)
    one = kinetic_term(RecoilState(A, 1, 0), atom)
    assert one / (2 * math.pi) == pytest.approx(3771, abs=5)


def test_no_pulses_is_diagonal_only(atom):
    basis = build_basis([A, B, E1], range(-3, 4))
    spec = assemble(basis, [], 0.0, atom)
    assert spec.couplings == []
    wr = atom.recoil_frequency
    for i, state in enumerate(basis.states):
        assert spec.diagonal[i] == pytest.approx(wr * state.n_z ** 2)


def test_sigma_plus_recoil_bookkeeping(atom):
    # one coupling per rung, each stepping n_z by the photon direction
    basis = build_basis([A, B, E1], range(-3, 4))
    spec = assemble(basis, [sigma_event("sigma_plus", +1)], 0.5e-6, atom)
    assert spec.couplings, "beam should couple something"
    for i, j, amp in spec.couplings:
        lo, hi = basis.states[i], basis.states[j]
        pair = {lo.level, hi.level}
        assert pair == {B, E1}
        ground = lo if lo.level is B else hi
        excited = hi if hi.level is E1 else lo
        assert excited.n_z == ground.n_z + 1
        assert amp == pytest.approx(0.5e6)
    rungs = {basis.states[i].n_z for i, _, _ in spec.couplings} | \
            {basis.states[j].n_z for _, j, _ in spec.couplings}
    assert len(spec.couplings) == 6  # every rung pair inside the window


def test_counterpropagating_pair_builds_lambda_chain(atom):
    pair = counter_intuitive_pair(0, 50e-9, 2 * math.pi * 1e8, atom,
                                  direction=-1, start_rung=0)
    basis = build_basis([A, B, E1], range(-5, 3))
    spec = assemble(basis, pair.events, 75e-9, atom, pair.epoch.anchors)
    pairs = {(basis.states[i], basis.states[j]) for i, j, _ in spec.couplings}
    chain = {(RecoilState(A, 0), RecoilState(E1, -1)),
             (RecoilState(E1, -1), RecoilState(A, 0)),
             (RecoilState(B, -2), RecoilState(E1, -1)),
             (RecoilState(E1, -1), RecoilState(B, -2))}
    assert any(p in chain or tuple(reversed(p)) in chain for p in pairs)
    # two-photon chain steps two recoils between the ground legs, with no
    # direct one-photon shortcut between them
    h = spec.matrix()
    ia = basis.index_of(RecoilState(A, 0))
    ie = basis.index_of(RecoilState(E1, -1))
    ib = basis.index_of(RecoilState(B, -2))
    assert h[ie, ia] != 0
    assert h[ie, ib] != 0
    assert h[ib, ia] == 0


def test_hermitian_exactly_when_no_decay(atom):
    pair = counter_intuitive_pair(0, 50e-9, 2 * math.pi * 1e8, atom)
    basis = build_basis([A, B, E1], range(-5, 3))
    h = assemble(basis, pair.events, 60e-9, atom, pair.epoch.anchors).matrix()
    assert np.array_equal(h.real, h.real.T)
    assert np.array_equal(h.imag, -h.imag.T)


def test_decay_appears_on_excited_levels_only(atom):
    basis = build_basis([A, B, E1], range(-2, 3))
    spec = assemble(basis, [], 0.0, atom, decay_rate=1e5)
    for i, state in enumerate(basis.states):
        expected = 1e5 if state.level.is_excited else 0.0
        assert spec.decay[i] == expected
    h = spec.matrix()
    assert np.any(h.imag.diagonal() < 0)


def test_pulse_referencing_missing_level_rejected(atom):
    basis = build_basis([A, B], range(-2, 3))  # no intermediate level
    with pytest.raises(ConfigurationError):
        assemble(basis, [sigma_event("sigma_plus", +1)], 0.0, atom)
    basis2 = build_basis([A, B, E1], range(-2, 3))  # no C
    pulse = copropagating_pulse(math.pi, 1e6, atom, "a-c", axis="x")
    with pytest.raises(ConfigurationError):
        assemble(basis2, [pulse], 0.0, atom)


def test_chirped_effective_pulse_degenerate_diagonal(atom):
    # the chirp contract: both target states sit at the same diagonal value
    ev = effective_pulse(math.pi, 1e6, RecoilState(A, -2), RecoilState(C, -4),
                         atom, "sigma_pair", "z", chirp=True)
    basis = build_basis([A, C], range(-8, 3))
    anchors = {A: (-2, 0), C: (-4, 0)}
    spec = assemble(basis, [ev], 0.0, atom, anchors)
    ia = basis.index_of(RecoilState(A, -2))
    ic = basis.index_of(RecoilState(C, -4))
    assert spec.diagonal[ia] == spec.diagonal[ic] == 0.0


def test_dark_state_matches_stated_formula():
    d = dark_state(1.0, 1.0, 0, -1)
    amp_a = d.amplitude(RecoilState(A, 0))
    amp_b = d.amplitude(RecoilState(B, -2))
    assert amp_a == pytest.approx(1 / math.sqrt(2))
    assert amp_b == pytest.approx(-1 / math.sqrt(2))


def test_dark_state_limits():
    only_a = dark_state(0.0, 5.0, 0, -1)
    assert only_a.amplitude(RecoilState(A, 0)) == pytest.approx(1.0)
    only_b = dark_state(7.0, 0.0, 0, -1)
    assert only_b.amplitude(RecoilState(B, -2)) == pytest.approx(-1.0)
    assert abs(only_b.norm() - 1.0) < 1e-15


def test_dark_state_degenerate_input_rejected():
    with pytest.raises(ConfigurationError):
        dark_state(0.0, 0.0, 0, -1)


@given(gp=st.one_of(st.just(0.0), st.floats(1e-6, 1e9)),
       gm=st.one_of(st.just(0.0), st.floats(1e-6, 1e9)),
       direction=st.sampled_from([-1, 1]), origin=st.integers(-20, 20))
@settings(max_examples=60, deadline=None)
def test_dark_state_normalized_no_excited(gp, gm, direction, origin):
    if gp == 0 and gm == 0:
        return
    d = dark_state(gp, gm, origin, direction)
    assert d.norm() == pytest.approx(1.0, abs=1e-12)
    assert d.population([E1]) == 0.0
    # orthogonal to the bright combination
    bright_a = gp
    bright_b = gm
    overlap = (np.conj(d.amplitude(RecoilState(A, origin))) * bright_a +
               np.conj(d.amplitude(RecoilState(B, origin + 2 * direction))) *
               bright_b)
    assert abs(overlap) <= 1e-9 * max(gp, gm)
