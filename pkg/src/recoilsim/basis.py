"""Momentum-lattice Hilbert space: basis construction and state vectors.

A basis state is an internal level plus a pair of integer recoil indices
(n_z, n_x) counting photon momenta along the two beam axes.  The basis is a
flat, deterministically ordered list so that wavefunctions are plain complex
vectors and all operators reduce to index arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError
from .params import InternalLevel

LEVEL_ORDER = {level: i for i, level in enumerate(InternalLevel)}

PRUNE_FLOOR = 1e-14          # on |amplitude|^2
PRUNE_NORM_BUDGET = 1e-12    # max total probability a prune may remove


class RecoilState(NamedTuple):
    level: InternalLevel
    n_z: int
    n_x: int = 0

    def __repr__(self):
        return f"|{self.level.tag},{self.n_z},{self.n_x}>"


class Basis:
    """Ordered, immutable collection of RecoilState with O(1) lookup."""

    def __init__(self, states: Sequence[RecoilState]):
        self.states: tuple[RecoilState, ...] = tuple(states)
        self.index: dict[RecoilState, int] = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ConfigurationError("duplicate states in basis")
        self.n_z = np.array([s.n_z for s in self.states], dtype=np.int64)
        self.n_x = np.array([s.n_x for s in self.states], dtype=np.int64)
        self.level_codes = np.array([LEVEL_ORDER[s.level] for s in self.states],
                                    dtype=np.int64)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state):
        return state in self.index

    def index_of(self, state: RecoilState) -> int:
        try:
            return self.index[state]
        except KeyError:
            raise ConfigurationError(f"state {state} not in basis") from None

    def level_mask(self, levels: Iterable[InternalLevel]) -> np.ndarray:
        codes = {LEVEL_ORDER[lv] for lv in levels}
        return np.isin(self.level_codes, list(codes))

    @property
    def levels(self) -> tuple[InternalLevel, ...]:
        seen = []
        for s in self.states:
            if s.level not in seen:
                seen.append(s.level)
        return tuple(seen)

    def window_z(self) -> tuple[int, int]:
        return int(self.n_z.min()), int(self.n_z.max())

    def window_x(self) -> tuple[int, int]:
        return int(self.n_x.min()), int(self.n_x.max())


def build_basis(levels: Iterable[InternalLevel],
                window_z: Iterable[int],
                window_x: Iterable[int] = (0,)) -> Basis:
    """Enumerate the truncated lattice basis.

    Ordering is (level enum order, n_z ascending, n_x ascending), which keeps
    basis layout reproducible between runs.
    """
    levels = list(levels)
    window_z = sorted(set(int(n) for n in window_z))
    window_x = sorted(set(int(n) for n in window_x))
    if not levels:
        raise ConfigurationError("basis needs at least one internal level")
    if not window_z or not window_x:
        raise ConfigurationError("momentum windows must be nonempty")
    levels = sorted(set(levels), key=lambda lv: LEVEL_ORDER[lv])
    states = [RecoilState(level, nz, nx)
              for level in levels for nz in window_z for nx in window_x]
    return Basis(states)


def span_window(occupied: Iterable[int], guard: int = 3) -> range:
    """Window covering all occupied rungs plus a guard band on each side."""
    occupied = list(occupied)
    if not occupied:
        raise ConfigurationError("no occupied rungs to span")
    return range(min(occupied) - guard, max(occupied) + guard + 1)


@dataclass
class Observables:
    """Level-filtered momentum statistics; mean/spread are None when the
    filtered population is zero rather than masquerading as 0."""

    population: float
    mean: float | None
    spread: float | None


class WaveFunction:
    """Complex amplitudes over a Basis at a given time."""

    def __init__(self, basis: Basis, amplitudes: np.ndarray | None = None,
                 time: float = 0.0):
        self.basis = basis
        if amplitudes is None:
            amplitudes = np.zeros(len(basis), dtype=np.complex128)
        else:
            amplitudes = np.asarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (len(basis),):
                raise ConfigurationError("amplitude vector does not match basis size")
        self.amplitudes = amplitudes
        self.time = float(time)

    @classmethod
    def from_components(cls, basis: Basis,
                        components: dict[RecoilState, complex],
                        time: float = 0.0,
                        normalize: bool = True) -> "WaveFunction":
        psi = cls(basis, time=time)
        for state, amp in components.items():
            psi.amplitudes[basis.index_of(state)] = amp
        if normalize:
            norm = psi.norm()
            if norm == 0:
                raise ConfigurationError("cannot normalize a zero wavefunction")
            psi.amplitudes /= norm
        return psi

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.basis, self.amplitudes.copy(), self.time)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def total_population(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude(self, state: RecoilState) -> complex:
        return complex(self.amplitudes[self.basis.index_of(state)])

    def population(self, levels: Iterable[InternalLevel] | None = None) -> float:
        w = np.abs(self.amplitudes) ** 2
        if levels is None:
            return float(w.sum())
        return float(w[self.basis.level_mask(levels)].sum())

    def observables(self, levels: Iterable[InternalLevel] | None = None,
                    axis: str = "z") -> Observables:
        """Population, mean momentum and momentum spread over a level filter."""
        if axis not in ("z", "x"):
            raise ConfigurationError("axis must be 'z' or 'x'")
        w = np.abs(self.amplitudes) ** 2
        if levels is not None:
            mask = self.basis.level_mask(levels)
            w = w * mask
        pop = float(w.sum())
        if pop == 0.0:
            return Observables(population=0.0, mean=None, spread=None)
        n = self.basis.n_z if axis == "z" else self.basis.n_x
        mean = float(np.sum(n * w) / pop)
        var = float(np.sum((n - mean) ** 2 * w) / pop)
        return Observables(population=pop, mean=mean, spread=float(np.sqrt(max(var, 0.0))))

    def boundary_population(self, margin: int = 1) -> float:
        """Probability sitting within ``margin`` rungs of the window edge."""
        zmin, zmax = self.basis.window_z()
        xmin, xmax = self.basis.window_x()
        near = (self.basis.n_z <= zmin + margin - 1) | (self.basis.n_z >= zmax - margin + 1)
        if xmax > xmin:
            near |= (self.basis.n_x <= xmin + margin - 1) | (self.basis.n_x >= xmax - margin + 1)
        return float(np.sum(np.abs(self.amplitudes[near]) ** 2))

    def pruned(self, floor: float = PRUNE_FLOOR) -> "WaveFunction":
        """Zero out amplitudes with |amp|^2 below ``floor``.

        Refuses to prune more total probability than PRUNE_NORM_BUDGET so the
        norm cannot drift measurably.
        """
        w = np.abs(self.amplitudes) ** 2
        small = (w > 0) & (w < floor)
        removed = float(w[small].sum())
        if removed > PRUNE_NORM_BUDGET:
            order = np.argsort(w)
            keep_mass = 0.0
            small = np.zeros(len(w), dtype=bool)
            for i in order:
                if w[i] == 0 or w[i] >= floor:
                    continue
                if keep_mass + w[i] > PRUNE_NORM_BUDGET:
                    break
                keep_mass += w[i]
                small[i] = True
        out = self.copy()
        out.amplitudes[small] = 0.0
        return out

    def components(self, floor: float = 0.0) -> list[tuple[RecoilState, complex]]:
        """(state, amplitude) pairs with |amp|^2 above ``floor``, basis order."""
        if floor <= 0.0:
            keep = np.nonzero(self.amplitudes)[0]
        else:
            keep = np.nonzero(np.abs(self.amplitudes) ** 2 > floor)[0]
        return [(self.basis.states[i], complex(self.amplitudes[i]))
                for i in keep]

    def project_onto(self, basis: Basis) -> "WaveFunction":
        """Re-express on another basis; errors if population would be lost."""
        out = WaveFunction(basis, time=self.time)
        lost = 0.0
        for i, state in enumerate(self.basis.states):
            amp = self.amplitudes[i]
            if amp == 0:
                continue
            if state in basis:
                out.amplitudes[basis.index_of(state)] = amp
            else:
                lost += abs(amp) ** 2
        if lost > 1e-12:
            raise ConfigurationError(
                f"target basis drops {lost:.3e} of population")
        return out
