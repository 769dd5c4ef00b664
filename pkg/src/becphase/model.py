"""Domain types shared by every engine.

Spatial modes are closed-form parametric families on a one-dimensional
position axis. All types are frozen dataclasses; nothing here mutates after
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from becphase.errors import ConfigError, Violation, ZeroAmplitude

TWO_PI = 2.0 * math.pi

#: Fraction of its central value by which a mode may vary across a window.
WINDOW_TOLERANCE = 0.01

#: Approximate-engine validity guard, m <= min(n_a, n_b) * APPROX_GUARD.
APPROX_GUARD = 0.1


def wrap_angle(x):
    """Map an angle (or array of angles) into [0, 2*pi)."""
    y = np.mod(x, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    if np.ndim(y) == 0:
        y = float(y)
        return 0.0 if y >= TWO_PI else y
    y[y >= TWO_PI] = 0.0
    return y


class ModeKind(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    PLANE_WAVE = "plane_wave"
    REGION_INDICATOR = "region_indicator"


class Engine(str, Enum):
    EXACT = "exact"
    LAMBDA_INTEGRAL = "lambda_integral"
    PHASE = "phase"


@dataclass(frozen=True)
class SpatialMode:
    """A complex one-particle wavefunction on the line.

    Use the classmethod constructors rather than filling fields by hand.
    ``gaussian`` is ``scale * exp(-(r - center)**2 / (2 width**2))`` and
    ``plane_wave`` is ``scale * exp(i k r)``.
    """

    kind: ModeKind
    amplitude_scale: float = 1.0
    center: float = 0.0
    width: float = 1.0
    wavenumber: float = 0.0
    intervals: tuple = ()
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude_scale < 0 or not math.isfinite(self.amplitude_scale):
            raise ValueError("amplitude_scale must be finite and nonnegative")
        if self.kind is ModeKind.GAUSSIAN and not self.width > 0:
            raise ValueError("gaussian width must be positive")
        if self.kind is ModeKind.REGION_INDICATOR:
            ivs = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
            for lo, hi in ivs:
                if not lo < hi:
                    raise ValueError(f"empty interval [{lo}, {hi}]")
            for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
                if lo <= hi:
                    raise ValueError("region_indicator intervals must be disjoint")
            object.__setattr__(self, "intervals", ivs)

    @classmethod
    def uniform(cls, scale: float = 1.0) -> "SpatialMode":
        return cls(ModeKind.UNIFORM, scale)

    @classmethod
    def gaussian(cls, center: float, width: float, scale: float = 1.0) -> "SpatialMode":
        return cls(ModeKind.GAUSSIAN, scale, center=center, width=width)

    @classmethod
    def plane_wave(cls, wavenumber: float, scale: float = 1.0) -> "SpatialMode":
        return cls(ModeKind.PLANE_WAVE, scale, wavenumber=wavenumber)

    @classmethod
    def region_indicator(cls, intervals, scale: float = 1.0) -> "SpatialMode":
        return cls(ModeKind.REGION_INDICATOR, scale, intervals=tuple(intervals))

    def with_phase(self, delta: float) -> "SpatialMode":
        """Return the same mode multiplied by exp(i*delta)."""
        return SpatialMode(self.kind, self.amplitude_scale, self.center, self.width,
                           self.wavenumber, self.intervals, self.phase + delta)

    def __call__(self, r):
        return evaluate_mode(self, r)

    def support(self) -> list[tuple[float, float]]:
        """Support as a list of closed intervals (infinite ends allowed)."""
        if self.amplitude_scale == 0:
            return []
        if self.kind is ModeKind.REGION_INDICATOR:
            return list(self.intervals)
        return [(-math.inf, math.inf)]


def evaluate_mode(mode: SpatialMode, r):
    """Complex amplitude of ``mode`` at position(s) ``r``."""
    x = np.asarray(r, dtype=float)
    s = mode.amplitude_scale
    if mode.kind is ModeKind.UNIFORM:
        val = np.full(x.shape, s, dtype=complex)
    elif mode.kind is ModeKind.GAUSSIAN:
        val = s * np.exp(-((x - mode.center) ** 2) / (2.0 * mode.width**2)) + 0j
    elif mode.kind is ModeKind.PLANE_WAVE:
        val = s * np.exp(1j * mode.wavenumber * x)
    else:
        inside = np.zeros(x.shape, dtype=bool)
        for lo, hi in mode.intervals:
            inside |= (x >= lo) & (x <= hi)
        val = np.where(inside, s, 0.0) + 0j
    if mode.phase:
        val = val * np.exp(1j * mode.phase)
    if val.ndim == 0:
        return complex(val)
    return val


@dataclass(frozen=True)
class ModePair:
    u_a: SpatialMode
    v_b: SpatialMode

    def swapped(self) -> "ModePair":
        return ModePair(self.v_b, self.u_a)

    def overlap_support(self) -> list[tuple[float, float]]:
        """Intervals where both modes are nonzero (up to isolated zeros)."""
        out = []
        for a_lo, a_hi in self.u_a.support():
            for b_lo, b_hi in self.v_b.support():
                lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
                if lo < hi:
                    out.append((lo, hi))
        return sorted(out)


def xi(modes: ModePair, r: float) -> float:
    """Relative phase arg(u_a(r) / v_b(r)) in [0, 2*pi)."""
    u = evaluate_mode(modes.u_a, r)
    v = evaluate_mode(modes.v_b, r)
    if u == 0 or v == 0:
        raise ZeroAmplitude(f"mode amplitude vanishes at r={r}")
    return wrap_angle(math.atan2(u.imag, u.real) - math.atan2(v.imag, v.real))


@dataclass(frozen=True)
class DoubleFockState:
    n_a: int
    n_b: int
    modes: ModePair = field(default_factory=lambda: ModePair(SpatialMode.uniform(), SpatialMode.uniform()))

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError("particle numbers must be nonnegative")


@dataclass(frozen=True)
class PhaseState:
    lam: float
    n_a: int
    n_b: int
    modes: ModePair = field(default_factory=lambda: ModePair(SpatialMode.uniform(), SpatialMode.uniform()))

    def __post_init__(self):
        object.__setattr__(self, "lam", wrap_angle(self.lam))
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError("particle numbers must be nonnegative")


CondensateState = Union[DoubleFockState, PhaseState]


@dataclass(frozen=True)
class DetectionSpec:
    """One transverse-spin measurement window: center, spin angle, width."""

    position: float
    angle: float
    width: float = 1e-3

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("detection width must be positive")

    @property
    def window(self) -> tuple[float, float]:
        return (self.position - 0.5 * self.width, self.position + 0.5 * self.width)

    def overlaps(self, other: "DetectionSpec") -> bool:
        return abs(self.position - other.position) < 0.5 * (self.width + other.width)


@dataclass(frozen=True)
class DetectionRecord:
    spec: DetectionSpec
    eta: int

    def __post_init__(self):
        if self.eta not in (1, -1):
            raise ValueError("eta must be +1 or -1")


@dataclass(frozen=True)
class ScenarioConfig:
    state: CondensateState
    specs: tuple = ()
    forced_etas: Optional[tuple] = None
    ensemble_size: int = 1
    seed: int = 0
    engine: Engine = Engine.EXACT

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "engine", Engine(self.engine))
        if self.forced_etas is not None:
            object.__setattr__(self, "forced_etas", tuple(int(e) for e in self.forced_etas))


def local_densities(state: CondensateState, r: float) -> tuple[float, float, float, float]:
    """Return (d_a, d_b, cross, xi) at r; xi is 0 where either mode vanishes."""
    u = evaluate_mode(state.modes.u_a, r)
    v = evaluate_mode(state.modes.v_b, r)
    au, av = abs(u), abs(v)
    d_a = state.n_a * au * au
    d_b = state.n_b * av * av
    cross = 2.0 * math.sqrt(state.n_a * state.n_b) * au * av
    offset = xi(state.modes, r) if au > 0 and av > 0 else 0.0
    return d_a, d_b, cross, offset


def window_violation(modes: ModePair, spec: DetectionSpec) -> Optional[str]:
    """Check that both modes are nearly constant across the detection window."""
    xs = np.linspace(spec.window[0], spec.window[1], 9)
    for name, mode in (("u_a", modes.u_a), ("v_b", modes.v_b)):
        vals = evaluate_mode(mode, xs)
        centre = evaluate_mode(mode, spec.position)
        spread = np.max(np.abs(vals - centre))
        if abs(centre) == 0:
            if spread > 0:
                return f"{name} switches on inside the window at r={spec.position}"
        elif spread > WINDOW_TOLERANCE * abs(centre):
            return (f"{name} varies by {spread / abs(centre):.3g} of its value across "
                    f"the window at r={spec.position}")
    return None


def overlapping_pairs(specs: Sequence[DetectionSpec]) -> list[tuple[int, int]]:
    """All index pairs (i < j) whose windows overlap, via a sweep over window starts."""
    order = sorted(range(len(specs)), key=lambda k: specs[k].window[0])
    pairs = []
    for pos, i in enumerate(order):
        for j in order[pos + 1:]:
            if specs[j].window[0] >= specs[i].window[1]:
                break
            if specs[i].overlaps(specs[j]):
                pairs.append((min(i, j), max(i, j)))
    return sorted(pairs)


def config_violations(cfg: ScenarioConfig) -> list[Violation]:
    """Every invariant violation of ``cfg``; empty when the config is valid."""
    out = []
    st = cfg.state
    if st.n_a + st.n_b < 1:
        out.append(Violation("EmptyCondensate", "n_a + n_b must be at least 1", "state"))
    specs = cfg.specs
    for i, j in overlapping_pairs(specs):
        out.append(Violation("OverlappingRegions", f"windows {i} and {j} overlap",
                             f"specs[{i}],specs[{j}]"))
    for i, s in enumerate(specs):
        msg = window_violation(st.modes, s)
        if msg:
            out.append(Violation("WindowTooWide", msg, f"specs[{i}]"))
    m = len(specs)
    if cfg.engine is Engine.LAMBDA_INTEGRAL and m > APPROX_GUARD * min(st.n_a, st.n_b):
        out.append(Violation("SequenceTooLongForApproxEngine",
                             f"m={m} exceeds min(n_a, n_b)/10 = {APPROX_GUARD * min(st.n_a, st.n_b):g}",
                             "specs"))
    if cfg.engine is Engine.PHASE and not isinstance(st, PhaseState):
        out.append(Violation("EngineStateMismatch", "phase engine needs a phase state", "state"))
    if cfg.engine is not Engine.PHASE and isinstance(st, PhaseState):
        out.append(Violation("EngineStateMismatch",
                             f"{cfg.engine.value} engine needs a double Fock state", "state"))
    if cfg.engine is Engine.EXACT and m > st.n_a + st.n_b:
        out.append(Violation("CondensateExhausted", "more detections than particles", "specs"))
    if cfg.forced_etas is not None:
        if len(cfg.forced_etas) != m:
            out.append(Violation("ForcedHistoryLength", "forced_etas must match specs", "forced_etas"))
        if any(e not in (1, -1) for e in cfg.forced_etas):
            out.append(Violation("InvalidEta", "forced outcomes must be +1 or -1", "forced_etas"))
    if cfg.ensemble_size < 1:
        out.append(Violation("EmptyEnsemble", "ensemble_size must be >= 1", "ensemble_size"))
    if not 0 <= cfg.seed < 2**64:
        out.append(Violation("SeedOutOfRange", "seed must fit in 64 unsigned bits", "seed"))
    return out


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` unchanged if valid, else raise ConfigError listing all violations."""
    problems = config_violations(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def grid_specs(count: int, start: float, stop: float, width: float,
               angles: Sequence[float] = (0.0,)) -> tuple:
    """Evenly spaced detection windows with angles cycled from ``angles``."""
    if count == 0:
        return ()
    pos = np.linspace(start, stop, count) if count > 1 else np.array([0.5 * (start + stop)])
    return tuple(DetectionSpec(float(p), float(angles[i % len(angles)]), width)
                 for i, p in enumerate(pos))
