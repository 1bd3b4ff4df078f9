"""Full experiment timelines: split, drift, reverse, transfer, recombine.

The representation is hybrid: pulse sequences act on lattice wavefunctions
(per arm, which is exact because the evolution is linear), while the
macroscopic separation of the arms lives in classical centroid tracks
evolved under gravity in closed form.  Quantization z and beam axis x are
both normal to gravity (y), so separations never depend on g.

Phase bookkeeping: each arm's complex ``amplitude`` is its laser-frame
amplitude, the one subsequent pulses act on -- equivalent to assuming every
synthesizer tone runs phase-continuously at the exact (chirped) resonance
of the transition it drives.  The lab-frame kinetic phase accumulated in
free flight is tracked separately in ``kinetic_phase`` and only matters for
where the spatial fringes sit, not for their spacing or contrast.

Drift durations are not hard-coded: each plan solves its closure conditions
(all centroids coincident at recombination) exactly, then checks the result
against the nominal round-number timings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import RecoilState, WaveFunction, build_basis
from .errors import (AdiabaticityError, ConfigurationError, PhysicsError,
                     SelectivityError)
from .params import AtomParams, InternalLevel
from .propagate import evolve_plan
from .pulses import (ADIABATIC_FLAG_THRESHOLD, Epoch, SequencePlan,
                     adiabaticity_parameter, shift_plan)

DEFAULT_CLOUD_SIZE = 1e-3     # m, initial cloud diameter scale
DEFAULT_BEAM_WIDTH = 0.5e-3   # m
DEFAULT_ARM_FLOOR = 1e-6      # population below which components are dropped
DEFAULT_OMEGA_EFF = 2 * math.pi * 5e5  # rad/s effective two-photon Rabi


@dataclass(eq=False)
class ArmTrack:
    """One macroscopically distinct component of the superposition."""

    id: str
    amplitude: complex
    level: InternalLevel
    n_z: int
    n_x: int
    position: np.ndarray      # (x, y, z) in m
    velocity: np.ndarray      # (vx, vy, vz) in m/s
    kinetic_phase: float = 0.0

    @property
    def population(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def state(self) -> RecoilState:
        return RecoilState(self.level, self.n_z, self.n_x)

    def copy(self) -> "ArmTrack":
        return ArmTrack(self.id, self.amplitude, self.level, self.n_z,
                        self.n_x, self.position.copy(), self.velocity.copy(),
                        self.kinetic_phase)


def initial_arm(atom: AtomParams, level=InternalLevel.A) -> ArmTrack:
    return ArmTrack("arm", 1.0 + 0.0j, level, 0, 0,
                    np.zeros(3), np.zeros(3), 0.0)


def lattice_velocity(atom: AtomParams, n_z: int, n_x: int,
                     vy: float) -> np.ndarray:
    vr = atom.recoil_velocity
    return np.array([n_x * vr, vy, n_z * vr])


def free_flight(arms: list[ArmTrack], duration: float,
                atom: AtomParams) -> list[ArmTrack]:
    """Ballistic drift: exact constant-gravity kinematics plus the kinetic
    phase of each arm's momentum."""
    if duration < 0:
        raise ConfigurationError("drift duration must be nonnegative")
    g = atom.gravity
    out = []
    for arm in arms:
        a = arm.copy()
        a.position = a.position + a.velocity * duration
        a.position[1] -= 0.5 * g * duration ** 2
        a.velocity = a.velocity.copy()
        a.velocity[1] -= g * duration
        a.kinetic_phase -= atom.kinetic_rate(a.n_z, a.n_x) * duration
        out.append(a)
    return out


def _anchor_cross_axis(plan: SequencePlan, axis: str,
                       cross_rung: int) -> SequencePlan:
    """Frame gauge: subtract the arm's own transverse kinetic energy.

    The sequence builders anchor the unused axis at rung zero; an arm that
    is already moving across the beam carries a large common-mode kinetic
    term that would only add a global phase but would still throttle the
    integrator's step size.
    """
    if cross_rung == 0:
        return plan
    epochs = []
    for ep in plan.epochs:
        anchors = {}
        for level, (az, ax) in ep.anchors.items():
            anchors[level] = (cross_rung, ax) if axis == "x" else (az, cross_rung)
        epochs.append(Epoch(ep.t_start, ep.duration, ep.events, anchors,
                            ep.label))
    return SequencePlan(kind=plan.kind, epochs=epochs,
                        drift_intervals=list(plan.drift_intervals),
                        pairs=plan.pairs,
                        expected_final=dict(plan.expected_final),
                        adiabaticity=plan.adiabaticity)


def _sequence_rungs(plan: SequencePlan, axis: str) -> set[int]:
    rungs = set()
    for epoch in plan.epochs:
        for anchor in epoch.anchors.values():
            rungs.add(anchor[0] if axis == "z" else anchor[1])
        for ev in epoch.events:
            if ev.target_rung is not None and ev.axis == axis:
                rungs.add(ev.target_rung)
                rungs.add(ev.target_rung + ev.delta_n)
    return rungs


def run_sequence_on_arm(arm: ArmTrack, plan: SequencePlan, atom: AtomParams,
                        levels, axis: str = "z", decay_rate: float = 0.0,
                        arm_floor: float = DEFAULT_ARM_FLOOR,
                        guard: int = 3):
    """Propagate one arm through a pulse sequence on its own small lattice.

    Returns (child arms, dropped population).  Linearity of the Schrodinger
    equation makes per-arm propagation exact; spatial selectivity is then
    just a matter of which arms a stage is applied to.
    """
    rungs = _sequence_rungs(plan, axis)
    rungs.add(arm.n_z if axis == "z" else arm.n_x)
    window = range(min(rungs) - guard, max(rungs) + guard + 1)
    if axis == "z":
        basis = build_basis(levels, window, (arm.n_x,))
        plan = _anchor_cross_axis(plan, axis, arm.n_x)
    else:
        basis = build_basis(levels, (arm.n_z,), window)
        plan = _anchor_cross_axis(plan, axis, arm.n_z)

    t0 = plan.epochs[0].t_start if plan.epochs else 0.0
    psi = WaveFunction.from_components(basis, {arm.state: 1.0}, time=t0,
                                       normalize=False)
    result = evolve_plan(psi, plan, atom, decay_rate=decay_rate)
    final = result.psi.pruned()

    duration = plan.total_duration - t0
    g = atom.gravity
    children = []
    kept = 0.0
    comps = final.components(floor=arm_floor)
    for k, (state, amp) in enumerate(comps):
        kept += abs(amp) ** 2
        vy_out = arm.velocity[1] - g * duration
        v_out = lattice_velocity(atom, state.n_z, state.n_x, vy_out)
        # trapezoid displacement: the ladder ramps velocity uniformly
        pos = arm.position + 0.5 * (arm.velocity + v_out) * duration
        pos[1] = arm.position[1] + arm.velocity[1] * duration \
            - 0.5 * g * duration ** 2
        child = ArmTrack(
            id=arm.id if len(comps) == 1 else f"{arm.id}/{k}",
            amplitude=arm.amplitude * amp,
            level=state.level, n_z=state.n_z, n_x=state.n_x,
            position=pos, velocity=v_out,
            kinetic_phase=arm.kinetic_phase)
        children.append(child)
    dropped = arm.population * max(0.0, 1.0 - kept)
    return children, dropped


def selective_transfer(arms: list[ArmTrack], pulse, atom: AtomParams,
                       axis_name: str, region_center: float,
                       region_halfwidth: float,
                       beam_width: float = DEFAULT_BEAM_WIDTH,
                       cloud_size: float = DEFAULT_CLOUD_SIZE,
                       intended=None, stage: str = "selective",
                       arm_floor: float = DEFAULT_ARM_FLOOR,
                       decay_rate: float = 0.0):
    """Apply a momentum-preserving pulse only to arms inside a region.

    Every non-selected arm must sit farther than beam_width + cloud_size
    from the region, otherwise the stage is physically unrealizable and a
    SelectivityError identifies it.
    """
    ax = {"x": 0, "y": 1, "z": 2}[axis_name]
    selected, others = [], []
    for arm in arms:
        dist = abs(arm.position[ax] - region_center)
        (selected if dist <= region_halfwidth else others).append(arm)

    margin = beam_width + cloud_size
    for arm in others:
        clearance = abs(arm.position[ax] - region_center) - region_halfwidth
        if clearance < margin:
            raise SelectivityError(
                f"arm {arm.id} is {clearance * 1e3:.3f} mm from the "
                f"addressed region; needs > {margin * 1e3:.3f} mm",
                stage=stage)
    warnings = []
    if not selected:
        warnings.append(f"{stage}: no arm inside the addressed region; no-op")
        return list(arms), 0.0, warnings
    if intended is not None:
        want = {a.id for a in arms if intended(a)}
        got = {a.id for a in selected}
        if want != got:
            raise SelectivityError(
                f"region selects arms {sorted(got)} but stage intends "
                f"{sorted(want)}", stage=stage)

    duration = pulse.envelope.duration
    seq = SequencePlan(kind="selective", epochs=[
        Epoch(pulse.envelope.start, duration, (pulse,),
              anchors={})])
    selected_ids = {id(a) for a in selected}
    out = []
    dropped = 0.0
    for arm in arms:
        if id(arm) in selected_ids:
            kids, d = run_sequence_on_arm(
                arm, seq, atom, levels=list(pulse.levels), axis=pulse.axis,
                arm_floor=arm_floor, decay_rate=decay_rate)
            out.extend(kids)
            dropped += d
        else:
            moved = free_flight([arm], duration, atom)
            out.extend(moved)
    return out, dropped, warnings


@dataclass
class StageRecord:
    name: str
    kind: str
    t_start: float
    t_end: float
    arms: list[ArmTrack]
    dropped: float
    warnings: list[str] = field(default_factory=list)

    def level_populations(self) -> dict[str, float]:
        pops: dict[str, float] = {}
        for arm in self.arms:
            pops[arm.level.tag] = pops.get(arm.level.tag, 0.0) + arm.population
        return pops

    def mean_momenta(self, tag: str) -> tuple[float, float]:
        w = [(a.population, a.n_z, a.n_x) for a in self.arms
             if a.level.tag == tag]
        total = sum(p for p, _, _ in w)
        if total == 0:
            return (math.nan, math.nan)
        return (sum(p * nz for p, nz, _ in w) / total,
                sum(p * nx for p, _, nx in w) / total)

    def separation(self, ax: int) -> float:
        if len(self.arms) < 2:
            return 0.0
        coords = [a.position[ax] for a in self.arms]
        return max(coords) - min(coords)

    def drop_y(self) -> float:
        if not self.arms:
            return 0.0
        return -min(a.position[1] for a in self.arms)


@dataclass
class PlanResult:
    kind: str
    atom: AtomParams
    stages: list[StageRecord]
    final_arms: list[ArmTrack]
    warnings: list[str]
    dropped_total: float
    extras: dict = field(default_factory=dict)

    def stage_rows(self):
        """Flattened per-stage, per-level rows for the log CSV."""
        rows = []
        for st in self.stages:
            for tag in sorted(st.level_populations()):
                mz, mx = st.mean_momenta(tag)
                rows.append({
                    "stage": st.name, "t_start": st.t_start,
                    "t_end": st.t_end, "level": tag,
                    "population": st.level_populations()[tag],
                    "mean_nz": mz, "mean_nx": mx,
                    "sep_z_m": st.separation(2), "sep_x_m": st.separation(0),
                    "drop_y_m": st.drop_y(),
                })
        return rows

    def accounted_population(self) -> float:
        return sum(a.population for a in self.final_arms) + self.dropped_total


class _Timeline:
    """Shared bookkeeping for plan execution."""

    def __init__(self, kind: str, atom: AtomParams):
        self.kind = kind
        self.atom = atom
        self.t = 0.0
        self.arms: list[ArmTrack] = [initial_arm(atom)]
        self.stages: list[StageRecord] = []
        self.warnings: list[str] = []
        self.dropped = 0.0

    def record(self, name: str, kind: str, duration: float,
               dropped: float = 0.0, warnings=()):
        self.dropped += dropped
        self.warnings.extend(warnings)
        self.stages.append(StageRecord(
            name=name, kind=kind, t_start=self.t, t_end=self.t + duration,
            arms=[a.copy() for a in self.arms], dropped=dropped,
            warnings=list(warnings)))
        self.t += duration

    def drift(self, name: str, duration: float):
        self.arms = free_flight(self.arms, duration, self.atom)
        self.record(name, "drift", duration)

    def sequence(self, name: str, plan: SequencePlan, levels, axis: str,
                 only=None, arm_floor=DEFAULT_ARM_FLOOR, decay_rate=0.0):
        plan = shift_plan(plan, self.t - (plan.epochs[0].t_start
                                          if plan.epochs else 0.0))
        duration = plan.total_duration - self.t if plan.epochs else 0.0
        new_arms = []
        dropped = 0.0
        for arm in self.arms:
            if only is not None and not only(arm):
                new_arms.extend(free_flight([arm], duration, self.atom))
                continue
            kids, d = run_sequence_on_arm(arm, plan, self.atom, levels, axis,
                                          decay_rate, arm_floor)
            new_arms.extend(kids)
            dropped += d
        self.arms = new_arms
        self.record(name, "quantum-sequence", duration, dropped)

    def result(self, extras=None) -> PlanResult:
        return PlanResult(kind=self.kind, atom=self.atom, stages=self.stages,
                          final_arms=[a.copy() for a in self.arms],
                          warnings=self.warnings, dropped_total=self.dropped,
                          extras=extras or {})

    def arm_by_state(self, level, n_z=None, n_x=None) -> ArmTrack:
        matches = [a for a in self.arms if a.level is level
                   and (n_z is None or a.n_z == n_z)
                   and (n_x is None or a.n_x == n_x)]
        if len(matches) != 1:
            raise PhysicsError(
                f"expected exactly one arm at {level.name}"
                f"{'' if n_z is None else f', n_z={n_z}'}; "
                f"found {len(matches)}")
        return matches[0]


def require_adiabatic(rms_rabi: float, stagger: float, strict: bool = True):
    xi = adiabaticity_parameter(rms_rabi, stagger)
    if strict and xi >= ADIABATIC_FLAG_THRESHOLD:
        raise AdiabaticityError(
            f"adiabaticity parameter {xi:.3f} is not << 1; "
            "slower or stronger pulses are required")
    return xi
