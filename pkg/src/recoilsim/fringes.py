"""Matter-wave fringe synthesis and analysis.

Recombined arms are superposed plane waves: intensity is the squared
modulus of the sum over arms of amp * exp(i k (n_z z + n_x x) + i phi),
with k the lattice wavenumber.  Two arms separated by dn recoils therefore
produce a fringe period of exactly lambda/dn -- sub-wavelength for dn > 1.
Spacing is recovered independently by discrete Fourier analysis, so the
synthesis path and the measurement path can check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NoFringeError, PhysicsError
from .params import AtomParams

MIN_PERIODS = 10          # grid must span at least this many fringes
MIN_SAMPLES_PER_PERIOD = 16
PEAK_OVER_BACKGROUND = 5.0


@dataclass(frozen=True)
class GridSpec:
    dims: int = 1
    pitch: float = 0.25e-9          # m per sample
    shape: tuple[int, ...] = (4096,)

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ConfigurationError("grids are 1D or 2D")
        if len(self.shape) != self.dims:
            raise ConfigurationError("shape must match dims")
        if self.pitch <= 0 or any(n < 2 for n in self.shape):
            raise ConfigurationError("grid pitch and sizes must be positive")

    @classmethod
    def default_2d(cls) -> "GridSpec":
        return cls(dims=2, pitch=0.25e-9, shape=(1024, 1024))


@dataclass(frozen=True)
class CoherenceEnvelope:
    """Gaussian coherence window of the source; limits the fringe field."""

    length: float = 300e-6  # m

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigurationError("coherence length must be positive")

    def intensity_factor(self, r2: np.ndarray) -> np.ndarray:
        return np.exp(-r2 / (2.0 * self.length ** 2))

    def periods_within(self, spacing: float) -> float:
        return self.length / spacing


@dataclass
class FringePattern:
    dims: int
    pitch: float
    samples: np.ndarray
    axes: tuple[str, ...]
    meta: dict = field(default_factory=dict)

    def axis_coordinates(self, axis_index: int) -> np.ndarray:
        n = self.samples.shape[axis_index]
        return (np.arange(n) - n / 2) * self.pitch


@dataclass
class SpacingEstimate:
    period: float
    bin_uncertainty: float

    def __iter__(self):
        return iter((self.period, self.bin_uncertainty))


def _arm_tuple(arm):
    """Accept ArmTrack-like objects or (amplitude, n_z, n_x[, phase])."""
    if hasattr(arm, "amplitude"):
        return (arm.amplitude * np.exp(1j * arm.kinetic_phase),
                arm.n_z, arm.n_x, getattr(arm, "level", None))
    if len(arm) == 3:
        amp, nz, nx = arm
        return (amp, nz, nx, None)
    amp, nz, nx, phase = arm
    return (amp * np.exp(1j * phase), nz, nx, None)


def synthesize(arms, grid: GridSpec, atom: AtomParams,
               envelope: CoherenceEnvelope | None = None) -> FringePattern:
    """Superpose the arms' plane waves on a spatial grid.

    All arms must share one internal level: components in different levels
    are distinguishable and cannot interfere.  The result is normalized to
    unit peak.
    """
    entries = [_arm_tuple(a) for a in arms]
    if not entries:
        raise ConfigurationError("need at least one arm")
    levels = {lv for *_, lv in entries if lv is not None}
    if len(levels) > 1:
        raise PhysicsError(
            "arms in different internal levels cannot interfere; transfer "
            f"them to one level first (got {sorted(lv.name for lv in levels)})")

    k = atom.wavenumber()
    _validate_grid(entries, grid, k)

    if grid.dims == 1:
        z = (np.arange(grid.shape[0]) - grid.shape[0] / 2) * grid.pitch
        fieldsum = np.zeros(grid.shape[0], dtype=np.complex128)
        for amp, nz, _, _ in entries:
            fieldsum += amp * np.exp(1j * (k * nz) * z)
        intensity = np.abs(fieldsum) ** 2
        r2 = z ** 2
        axes = ("z",)
    else:
        nz_, nx_ = grid.shape
        z = (np.arange(nz_) - nz_ / 2) * grid.pitch
        x = (np.arange(nx_) - nx_ / 2) * grid.pitch
        zz = z[:, None]
        xx = x[None, :]
        fieldsum = np.zeros((nz_, nx_), dtype=np.complex128)
        for amp, nz, nx, _ in entries:
            fieldsum += amp * np.exp(1j * k * (nz * zz + nx * xx))
        intensity = np.abs(fieldsum) ** 2
        r2 = zz ** 2 + xx ** 2
        axes = ("z", "x")

    if envelope is not None:
        intensity = intensity * envelope.intensity_factor(r2)
    peak = intensity.max()
    if peak > 0:
        intensity = intensity / peak
    return FringePattern(dims=grid.dims, pitch=grid.pitch, samples=intensity,
                         axes=axes,
                         meta={"wavenumber": k,
                               "coherence_length":
                                   envelope.length if envelope else None})


def _validate_grid(entries, grid: GridSpec, k: float) -> None:
    for axis_index, key in enumerate(("n_z", "n_x")[:grid.dims]):
        ns = [e[1 + axis_index] for e in entries]
        dn = max(ns) - min(ns)
        if dn == 0:
            continue
        finest = 2 * math.pi / (k * dn)
        span = grid.shape[axis_index] * grid.pitch
        if span < MIN_PERIODS * finest:
            raise ConfigurationError(
                f"grid spans {span / finest:.1f} periods on {key}; "
                f"needs >= {MIN_PERIODS}")
        if finest < MIN_SAMPLES_PER_PERIOD * grid.pitch:
            raise ConfigurationError(
                f"only {finest / grid.pitch:.1f} samples per period on {key}; "
                f"needs >= {MIN_SAMPLES_PER_PERIOD}")


def extract_spacing(pattern: FringePattern, axis: str = "z") -> SpacingEstimate:
    """Dominant fringe period along one axis via the discrete spectrum.

    The uncertainty is one frequency bin, converted to a period difference.
    """
    if axis not in pattern.axes:
        raise ConfigurationError(f"pattern has no axis {axis!r}")
    data = pattern.samples
    if pattern.dims == 2:
        other = 1 - pattern.axes.index(axis)
        data = data.mean(axis=other)
    data = data - data.mean()
    n = data.shape[0]
    spectrum = np.abs(np.fft.rfft(data))
    spectrum[0] = 0.0
    peak_idx = int(np.argmax(spectrum))
    peak = spectrum[peak_idx]
    rest = np.delete(spectrum, [0, peak_idx])
    background = float(np.mean(rest)) if rest.size else 0.0
    if peak <= 0 or (background > 0 and peak < PEAK_OVER_BACKGROUND * background) \
            or peak < 1e-9 * n:
        raise NoFringeError(
            f"no spectral peak above {PEAK_OVER_BACKGROUND}x background on "
            f"axis {axis!r}")
    span = n * pattern.pitch
    freq = peak_idx / span
    period = 1.0 / freq
    uncertainty = period ** 2 / span  # one bin, |d(1/f)| = f^-2 * df
    return SpacingEstimate(period=period, bin_uncertainty=uncertainty)


def contrast(pattern: FringePattern,
             envelope: CoherenceEnvelope | None = None) -> float:
    """(max - min) / (max + min) over the central coherence region."""
    data = pattern.samples
    if envelope is not None:
        half = envelope.length / 2
        if pattern.dims == 1:
            z = pattern.axis_coordinates(0)
            data = data[np.abs(z) <= half] if np.any(np.abs(z) <= half) else data
        else:
            z = pattern.axis_coordinates(0)
            x = pattern.axis_coordinates(1)
            zm = np.abs(z) <= half
            xm = np.abs(x) <= half
            if zm.any() and xm.any():
                data = data[np.ix_(zm, xm)]
    hi = float(data.max())
    lo = float(data.min())
    if hi + lo == 0:
        return 0.0
    return (hi - lo) / (hi + lo)


@dataclass
class RamseyScan:
    deltas: np.ndarray            # rad/s
    populations: np.ndarray       # P_c per delta
    tau: float
    fringe_period_hz: float       # measured from minima spacing
    central_width_hz: float       # half the span between minima around zero
    width_scale_hz: float         # 1/(2 pi tau_measured)

    def rows(self):
        return [{"delta_hz": d / (2 * math.pi), "population_c": p}
                for d, p in zip(self.deltas, self.populations)]


def ramsey_scan(result, periods: float = 3.2,
                points_per_period: int = 100, mapper=map) -> RamseyScan:
    """Scan the closing pulse's two-photon detuning and read P_c.

    ``result`` must expose ``tau`` (s) and ``pc_of(delta_rad_s)``.  The grid
    must span at least 3 fringe periods with at least 20 points each.
    ``mapper`` lets callers farm the (independent) scan points out to a
    process pool; it must preserve ordering.
    """
    if periods < 3:
        raise ConfigurationError("scan must span at least 3 fringe periods")
    if points_per_period < 20:
        raise ConfigurationError("scan needs at least 20 points per period")
    tau = result.tau
    period_rad = 2 * math.pi / tau
    half_span = periods / 2 * period_rad
    n = int(round(periods * points_per_period)) | 1  # odd: include delta=0
    deltas = np.linspace(-half_span, half_span, n)
    pops = np.array(list(mapper(result.pc_of, [float(d) for d in deltas])))

    minima = _local_minima(deltas, pops)
    if len(minima) < 2:
        raise NoFringeError("fewer than two fringe minima in the scan window")
    spacings = np.diff(minima)
    period_meas = float(np.mean(spacings))
    below = [m for m in minima if m < -0.25 * period_meas]
    above = [m for m in minima if m > +0.25 * period_meas]
    if below and above:
        central_width = (above[0] - below[-1]) / 2
    else:
        central_width = period_meas
    period_hz = period_meas / (2 * math.pi)
    return RamseyScan(
        deltas=deltas, populations=pops, tau=tau,
        fringe_period_hz=period_hz,
        central_width_hz=central_width / (2 * math.pi),
        width_scale_hz=1.0 / (2 * math.pi * (1.0 / period_hz)))


def _local_minima(x: np.ndarray, y: np.ndarray) -> list[float]:
    """Positions of local minima, refined by parabolic interpolation."""
    out = []
    for i in range(1, len(y) - 1):
        if y[i] <= y[i - 1] and y[i] <= y[i + 1] and \
                (y[i] < y[i - 1] or y[i] < y[i + 1]):
            denom = (y[i - 1] - 2 * y[i] + y[i + 1])
            if denom > 0:
                shift = 0.5 * (y[i - 1] - y[i + 1]) / denom
            else:
                shift = 0.0
            step = x[1] - x[0]
            out.append(float(x[i] + shift * step))
    return out


def scan_minimum_near(scan: RamseyScan, center_hz: float = 0.0) -> float:
    """The fringe minimum closest to ``center_hz``, in Hz."""
    minima = _local_minima(scan.deltas, scan.populations)
    if not minima:
        raise NoFringeError("scan has no minima")
    hz = [m / (2 * math.pi) for m in minima]
    return min(hz, key=lambda v: abs(v - center_hz))
