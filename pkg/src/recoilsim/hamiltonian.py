"""Hamiltonian assembly on the recoil lattice.

The frame convention: optical and hyperfine frequencies are already removed,
and each internal level is additionally shifted by the kinetic energy of an
anchor rung (per epoch), so the transition chain a pulse targets sits at
exactly zero diagonal.  What remains on the diagonal is the real physics a
chirped synthesizer cannot remove for more than one momentum class at a
time: quadratic recoil/Doppler mismatches of all the other rungs.  A second
synthesizer tone inside the same window is represented by a coupling whose
phase rotates at the tone-spacing rate.

Couplings are stored as whole-basis permutation/pattern arrays: every
coupling family here is a perfect matching (each state has at most one
partner per family), so H*psi is a handful of vectorized gather-multiply
operations.  That matching structure is also the physical content of the
momentum selection rules: within one family a state can only ever reach its
single partner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Basis, RecoilState, WaveFunction, build_basis
from .errors import ConfigurationError
from .params import AtomParams, InternalLevel
from .pulses import (CHANNEL_LAMBDA, CHANNEL_RAMAN, Epoch, PulseEvent,
                     SIGMA_LEG)


def kinetic_term(state: RecoilState, atom: AtomParams) -> float:
    """Free-particle kinetic energy of a lattice state, rad/s."""
    return atom.kinetic_rate(state.n_z, state.n_x)


@dataclass
class CouplingFamily:
    """One beam or tone, expanded over the basis as a perfect matching."""

    perm: np.ndarray       # partner index per state (identity where uncoupled)
    pattern: np.ndarray    # complex; H[i, perm[i]] = envelope(t) * pattern[i] * e^{i rate[i] t}
    rate: np.ndarray       # rad/s phase-ramp per entry (anti-symmetric over the matching)
    envelope_value: object  # callable t -> scalar envelope
    peak: float
    label: str = ""
    has_rate: bool = False

    def __post_init__(self):
        self._env_cache = (float("nan"), 0.0)

    def _env(self, t: float) -> float:
        # RK4 evaluates the midpoint twice per step; memoize the last call
        last_t, last_v = self._env_cache
        if t == last_t:
            return last_v
        v = self.envelope_value(t)
        self._env_cache = (t, v)
        return v

    def apply_into(self, t: float, psi: np.ndarray, out: np.ndarray,
                   buf: np.ndarray | None = None) -> None:
        env = self._env(t)
        if env == 0.0:
            return
        if buf is None:
            buf = np.empty_like(psi)
        psi.take(self.perm, out=buf)
        buf *= self.pattern
        if self.has_rate:
            buf *= np.exp(1j * t * self.rate)
        buf *= env
        out += buf


@dataclass
class HamiltonianSpec:
    """Snapshot of the operator at one instant (test/introspection view)."""

    basis: Basis
    diagonal: np.ndarray                 # real, rad/s
    couplings: list[tuple[int, int, complex]]  # (from_idx, to_idx, H[to, from])
    decay: np.ndarray                    # nonnegative loss rates, rad/s

    def matrix(self) -> np.ndarray:
        n = len(self.basis)
        h = np.zeros((n, n), dtype=np.complex128)
        h[np.arange(n), np.arange(n)] = self.diagonal - 0.5j * self.decay
        for i, j, amp in self.couplings:
            h[j, i] += amp
            h[i, j] += np.conj(amp)
        return h


class EpochHamiltonian:
    """Compiled operator for one epoch: static structure, scalar envelopes."""

    def __init__(self, basis: Basis, diagonal: np.ndarray,
                 families: list[CouplingFamily], decay: np.ndarray):
        self.basis = basis
        self.diagonal = diagonal            # real part of the frame diagonal
        self.decay = decay
        self._diag_complex = diagonal - 0.5j * decay
        self.families = families
        self._buf = np.empty(len(basis), dtype=np.complex128)

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = self._diag_complex * psi
        for fam in self.families:
            fam.apply_into(t, psi, out)
        return out

    def derivative(self, t: float, psi: np.ndarray) -> np.ndarray:
        return -1j * self.apply(t, psi)

    def derivative_into(self, t: float, psi: np.ndarray,
                        out: np.ndarray) -> None:
        np.multiply(self._diag_complex, psi, out=out)
        for fam in self.families:
            fam.apply_into(t, psi, out, self._buf)
        out *= -1j

    def max_element(self) -> float:
        peak = float(np.max(np.abs(self._diag_complex))) if len(self.basis) else 0.0
        for fam in self.families:
            peak = max(peak, fam.peak * float(np.max(np.abs(fam.pattern))))
        return peak

    def row_bound(self, t0: float | None = None,
                  t1: float | None = None) -> float:
        """Gershgorin-style bound on the spectral radius.

        With a time window, the envelopes are sampled over it so beams that
        never peak simultaneously are not double-counted.
        """
        diag_max = float(np.max(np.abs(self._diag_complex))) if len(self.basis) else 0.0
        elem = [fam.peak * float(np.max(np.abs(fam.pattern)))
                for fam in self.families]
        if t0 is None or t1 is None or t1 <= t0 or not self.families:
            return diag_max + sum(elem)
        grid = np.linspace(t0, t1, 257)
        total = np.zeros_like(grid)
        for fam, peak_elem in zip(self.families, elem):
            if fam.peak == 0:
                continue
            scale = peak_elem / fam.peak
            total += scale * np.array([fam.envelope_value(t) for t in grid])
        # small safety factor against the sampling missing the true peak
        return diag_max + 1.02 * float(total.max())

    def matrix(self, t: float) -> np.ndarray:
        return self.snapshot(t).matrix()

    def active_mask(self, amps: np.ndarray) -> np.ndarray:
        """States reachable from nonzero amplitudes via this epoch's
        couplings.  Everything outside stays exactly zero under the
        evolution, so it can be excluded with no approximation."""
        active = np.abs(amps) > 0.0
        while True:
            grown = active.copy()
            for fam in self.families:
                grown |= (fam.pattern != 0) & active[fam.perm]
            if bool(np.array_equal(grown, active)):
                return active
            active = grown

    def reduced(self, idx: np.ndarray) -> "EpochHamiltonian":
        """Restriction to the index set ``idx`` (closed under couplings)."""
        inverse = np.full(len(self.basis), -1, dtype=np.int64)
        inverse[idx] = np.arange(len(idx))
        families = []
        for fam in self.families:
            pattern = fam.pattern[idx]
            if not np.any(pattern):
                continue
            perm = inverse[fam.perm[idx]]
            loose = perm < 0
            if np.any(loose & (pattern != 0)):
                raise ValueError("index set not closed under couplings")
            perm[loose] = np.nonzero(loose)[0]
            rate = fam.rate[idx]
            families.append(CouplingFamily(
                perm=perm, pattern=pattern, rate=rate,
                envelope_value=fam.envelope_value, peak=fam.peak,
                label=fam.label, has_rate=bool(np.any(rate[pattern != 0]))))
        return EpochHamiltonian(_SubBasis(len(idx)), self.diagonal[idx],
                                families, self.decay[idx])

    def snapshot(self, t: float) -> HamiltonianSpec:
        couplings = []
        for fam in self.families:
            env = fam.envelope_value(t)
            for i in np.nonzero(np.abs(fam.pattern))[0]:
                j = int(fam.perm[i])
                if j <= i:
                    continue
                # pattern[j] multiplies psi[i] into H psi [j]: H[j, i]
                amp = env * fam.pattern[j]
                if fam.has_rate:
                    amp = amp * np.exp(1j * fam.rate[j] * t)
                couplings.append((int(i), j, complex(amp)))
        return HamiltonianSpec(self.basis, self.diagonal.copy(),
                               couplings, self.decay.copy())


class _SubBasis:
    """Bare length stand-in for reduced operators (no state lookup)."""

    def __init__(self, n: int):
        self._n = n

    def __len__(self):
        return self._n


def frame_diagonal(basis: Basis, atom: AtomParams,
                   anchors: dict[InternalLevel, tuple[int, int]] | None) -> np.ndarray:
    anchors = anchors or {}
    shifts = {}
    for level in InternalLevel:
        nz, nx = anchors.get(level, (0, 0))
        shifts[level] = atom.kinetic_rate(nz, nx)
    diag = np.empty(len(basis), dtype=np.float64)
    for i, state in enumerate(basis.states):
        diag[i] = kinetic_term(state, atom) - shifts[state.level]
    return diag


def _sigma_family(basis: Basis, event: PulseEvent) -> CouplingFamily:
    leg = SIGMA_LEG[event.polarization]
    n = len(basis)
    perm = np.arange(n)
    pattern = np.zeros(n, dtype=np.complex128)
    for i, state in enumerate(basis.states):
        if state.level is not leg:
            continue
        partner = RecoilState(InternalLevel.E1, state.n_z + event.direction,
                              state.n_x)
        if partner not in basis:
            continue
        j = basis.index_of(partner)
        perm[i], perm[j] = j, i
        pattern[i] = 0.5
        pattern[j] = 0.5
    return CouplingFamily(perm=perm, pattern=pattern,
                          rate=np.zeros(n), envelope_value=event.envelope.value,
                          peak=event.envelope.peak_rabi,
                          label=f"{event.polarization}:{event.direction:+d}z")


def _effective_pairs(basis: Basis, event: PulseEvent):
    lf, lt = event.levels
    for i, state in enumerate(basis.states):
        if state.level is not lf:
            continue
        rung = state.n_z if event.axis == "z" else state.n_x
        if event.target_rung is not None and rung != event.target_rung:
            continue
        if event.axis == "z":
            partner = RecoilState(lt, state.n_z + event.delta_n, state.n_x)
        else:
            partner = RecoilState(lt, state.n_z, state.n_x + event.delta_n)
        if partner in basis:
            yield i, basis.index_of(partner)


def _effective_family(basis: Basis, event: PulseEvent, atom: AtomParams,
                      anchors: dict[InternalLevel, tuple[int, int]] | None) -> CouplingFamily:
    anchors = anchors or {}
    lf, lt = event.levels
    shift_f = atom.kinetic_rate(*anchors.get(lf, (0, 0)))
    shift_t = atom.kinetic_rate(*anchors.get(lt, (0, 0)))
    ref = event.reference_rung if event.reference_rung is not None else 0
    wr = atom.recoil_frequency
    tone = wr * ((ref + event.delta_n) ** 2 - ref ** 2) if event.delta_n else 0.0
    rho = tone + event.bias_detuning - (shift_t - shift_f)

    n = len(basis)
    perm = np.arange(n)
    pattern = np.zeros(n, dtype=np.complex128)
    rate = np.zeros(n, dtype=np.float64)
    half = 0.5 * np.exp(1j * event.phase)
    for i, j in _effective_pairs(basis, event):
        perm[i], perm[j] = j, i
        pattern[j] = half          # H[to, from]
        pattern[i] = np.conj(half)
        rate[j] = -rho
        rate[i] = +rho
    return CouplingFamily(perm=perm, pattern=pattern, rate=rate,
                          envelope_value=event.envelope.value,
                          peak=event.envelope.peak_rabi,
                          label=f"{event.polarization}:{lf.tag}->{lt.tag}",
                          has_rate=bool(abs(rho) > 0.0))


def compile_epoch(basis: Basis, events, atom: AtomParams,
                  anchors: dict[InternalLevel, tuple[int, int]] | None = None,
                  decay_rate: float = 0.0) -> EpochHamiltonian:
    """Turn an epoch's active events into a ready-to-integrate operator."""
    families = []
    for event in events:
        if event.channel == CHANNEL_LAMBDA:
            if not any(s.level is InternalLevel.E1 for s in basis.states):
                raise ConfigurationError(
                    "adiabatic channel needs the intermediate level in the basis")
            families.append(_sigma_family(basis, event))
        elif event.channel == CHANNEL_RAMAN:
            for level in event.levels:
                if not any(s.level is level for s in basis.states):
                    raise ConfigurationError(
                        f"pulse addresses level {level.name} missing from basis")
            families.append(_effective_family(basis, event, atom, anchors))
        else:  # pragma: no cover - PulseEvent validation rejects this earlier
            raise ConfigurationError(f"unknown channel {event.channel!r}")
    diagonal = frame_diagonal(basis, atom, anchors)
    decay = np.zeros(len(basis))
    if decay_rate:
        for i, state in enumerate(basis.states):
            if state.level.is_excited:
                decay[i] = decay_rate
    return EpochHamiltonian(basis, diagonal, families, decay)


def compile_from_epoch(basis: Basis, epoch: Epoch, atom: AtomParams,
                       decay_rate: float = 0.0) -> EpochHamiltonian:
    return compile_epoch(basis, epoch.events, atom, epoch.anchors, decay_rate)


def assemble(basis: Basis, active_pulses, t: float, atom: AtomParams,
             anchors: dict[InternalLevel, tuple[int, int]] | None = None,
             decay_rate: float = 0.0) -> HamiltonianSpec:
    """Snapshot of the rotated-frame Hamiltonian at time ``t``.

    With no active pulses this is diagonal; with pulses, every coupling
    changes the momentum indices by exactly the recoil signature of its
    beam.  Hermitian whenever decay is off.
    """
    epoch = compile_epoch(basis, list(active_pulses), atom, anchors, decay_rate)
    return epoch.snapshot(t)


def dark_state(rabi_plus: float, rabi_minus: float, n_origin: int,
               direction: int, basis: Basis | None = None) -> WaveFunction:
    """The uncoupled superposition of the lambda system's ground legs.

    Returns the normalized state rabi_minus*|a, n> - rabi_plus*|b, n + 2d>.
    It carries no intermediate-level amplitude, and it is stationary under a
    lambda coupling whose a-leg amplitude is rabi_plus and whose b-leg
    amplitude is rabi_minus.
    """
    if rabi_plus == 0.0 and rabi_minus == 0.0:
        raise ConfigurationError("dark state undefined for two zero Rabi frequencies")
    if direction not in (-1, +1):
        raise ConfigurationError("direction must be +1 or -1")
    target_rung = n_origin + 2 * direction
    if basis is None:
        lo, hi = sorted((n_origin, target_rung))
        basis = build_basis(
            [InternalLevel.A, InternalLevel.B, InternalLevel.E1],
            range(lo - 3, hi + 4))
    # hypot survives magnitudes whose squares would underflow
    norm = np.hypot(rabi_plus, rabi_minus)
    amps = np.zeros(len(basis), dtype=np.complex128)
    amps[basis.index_of(RecoilState(InternalLevel.A, n_origin))] = \
        rabi_minus / norm
    amps[basis.index_of(RecoilState(InternalLevel.B, target_rung))] = \
        -rabi_plus / norm
    return WaveFunction(basis, amps)
