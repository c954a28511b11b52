"""Sparse multipath MISO channel with real-valued path delays.

The "analog" domain is emulated on a uniform grid oversampled well beyond
the signal bandwidth; fractional delays are applied through frequency-domain
phase ramps, which are exact for band-limited grid content.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .core import ensure_finite, make_rng

MAX_CONDITION = 1e8  # regenerate path angles above this cond(H^H H)


@dataclass(frozen=True)
class AnalogGrid:
    """Densely sampled complex baseband signal on a uniform time grid.

    samples is (n,) for a scalar signal or (m_antennas, n) per antenna;
    rate counts grid samples per symbol interval.
    """

    samples: np.ndarray
    symbol_interval: float
    rate: int
    start_time: float = 0.0

    def __post_init__(self):
        self.samples.setflags(write=False)

    @property
    def dt(self) -> float:
        return self.symbol_interval / self.rate

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.n_samples) * self.dt


@dataclass(frozen=True)
class PathChannel:
    """L discrete propagation paths: per-path gain vectors and delays."""

    gains: np.ndarray        # (m_antennas, n_paths)
    delays: np.ndarray       # (n_paths,) seconds, >= 0
    symbol_interval: float   # seconds

    def __post_init__(self):
        ensure_finite(self.gains, "path gains")
        ensure_finite(self.delays, "path delays")
        if self.gains.ndim != 2:
            raise ValueError("gains must be (m_antennas, n_paths)")
        if self.delays.shape != (self.gains.shape[1],):
            raise ValueError("one delay per path required")
        if np.any(self.delays < 0):
            raise ValueError("negative path delay")
        self.gains.setflags(write=False)
        self.delays.setflags(write=False)

    @property
    def m_antennas(self) -> int:
        return self.gains.shape[0]

    @property
    def n_paths(self) -> int:
        return self.gains.shape[1]

    @property
    def tau_max(self) -> float:
        return float(self.delays.max())


@dataclass(frozen=True)
class DelayDecomposition:
    """Split of a delay into symbol-tap index and sub-symbol residue."""

    tap: int
    residue: float           # seconds, in [-T/2, T/2)

    def reconstruct(self, symbol_interval: float) -> float:
        return self.tap * symbol_interval + self.residue


def decompose_delay(tau: float, symbol_interval: float) -> DelayDecomposition:
    """Round a delay to the nearest symbol tap; the residue keeps the rest.

    Half-interval ties round up so the residue stays in [-T/2, T/2).
    """
    if tau < 0:
        raise ValueError("negative delay")
    n = int(math.floor(tau / symbol_interval + 0.5))
    return DelayDecomposition(n, tau - n * symbol_interval)


def ula_steering(m_antennas: int, theta: float) -> np.ndarray:
    """Half-wavelength uniform linear array response for angle theta (rad)."""
    return np.exp(1j * np.pi * np.arange(m_antennas) * np.sin(theta))


def generate_channel(m_antennas: int, n_paths: int, symbol_interval: float,
                     delay_range, rng: np.random.Generator,
                     delay_quantum: float | None = None) -> PathChannel:
    """Draw a random sparse channel realization.

    Delays are i.i.d. uniform on delay_range (seconds); when delay_quantum
    is given they are then rounded to its nearest multiple. Per-path gain is
    a complex normal scalar (variance 1/n_paths) on a uniform-linear-array
    steering vector with angle uniform in [-60 deg, 60 deg]. Rank-deficient
    gain matrices are redrawn.
    """
    if m_antennas < n_paths or n_paths < 1:
        raise ValueError("need m_antennas >= n_paths >= 1")
    lo, hi = float(delay_range[0]), float(delay_range[1])
    if lo < 0 or hi < lo:
        raise ValueError("degenerate delay range")
    delays = rng.uniform(lo, hi, size=n_paths)
    if delay_quantum is not None:
        if delay_quantum <= 0:
            raise ValueError("delay_quantum must be positive")
        delays = np.round(delays / delay_quantum) * delay_quantum
    for _ in range(64):
        theta = rng.uniform(-np.pi / 3, np.pi / 3, size=n_paths)
        g = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))
        g *= np.sqrt(1.0 / (2 * n_paths))
        gains = np.stack([g[i] * ula_steering(m_antennas, theta[i])
                          for i in range(n_paths)], axis=1)
        gram = gains.conj().T @ gains
        if n_paths == 1 or np.linalg.cond(gram) < MAX_CONDITION:
            return PathChannel(gains, delays, symbol_interval)
    raise RuntimeError("could not draw a full-rank channel")


def _delay_phase_ramp(n_fft: int, dt: float, tau: float) -> np.ndarray:
    f = sfft.fftfreq(n_fft, d=dt)
    return np.exp(-2j * np.pi * f * tau)


def apply_channel(tx: AnalogGrid, ch: PathChannel) -> AnalogGrid:
    """Propagate per-antenna grids through the multipath channel.

    Output is the scalar receive signal sum_l gains_l^H tx(t - tau_l); each
    delay is realized by a frequency-domain phase ramp on a zero-padded
    transform, so no circular wrap reaches the reported span.
    """
    x = np.atleast_2d(tx.samples)
    if x.shape[0] != ch.m_antennas:
        raise ValueError(f"tx has {x.shape[0]} antenna rows, channel expects {ch.m_antennas}")
    dt = tx.dt
    extra = int(math.ceil(ch.tau_max / dt)) if ch.tau_max > 0 else 0
    n_out = tx.n_samples + extra
    n_fft = sfft.next_fast_len(n_out + 8)
    if n_fft < tx.n_samples + extra:
        raise ValueError("grid too short for the channel delay span")
    X = sfft.fft(x, n_fft, axis=1)
    # combine antennas first: per-antenna response sum_l conj(g[m,l]) e^{-j2pi f tau_l}
    f = sfft.fftfreq(n_fft, d=dt)
    y = np.zeros(n_fft, dtype=np.complex128)
    for l in range(ch.n_paths):
        ramp = np.exp(-2j * np.pi * f * ch.delays[l])
        y += (ch.gains[:, l].conj() @ X) * ramp
    out = sfft.ifft(y)[:n_out]
    return AnalogGrid(out, tx.symbol_interval, tx.rate, tx.start_time)


def delay_grid(grid: AnalogGrid, tau: float) -> AnalogGrid:
    """Delay a scalar grid by tau seconds (band-limited-exact phase ramp)."""
    x = grid.samples
    if x.ndim != 1:
        raise ValueError("delay_grid expects a scalar grid")
    dt = grid.dt
    extra = int(math.ceil(abs(tau) / dt))
    n_out = grid.n_samples + (extra if tau > 0 else 0)
    n_fft = sfft.next_fast_len(grid.n_samples + extra + 8)
    X = sfft.fft(x, n_fft)
    out = sfft.ifft(X * _delay_phase_ramp(n_fft, dt, tau))[:n_out]
    return AnalogGrid(out, grid.symbol_interval, grid.rate, grid.start_time)


def add_awgn(sig: AnalogGrid, noise_psd: float, rng: np.random.Generator) -> AnalogGrid:
    """Add white complex Gaussian noise of power spectral density noise_psd.

    Per grid sample the variance is noise_psd / dt, which makes the
    symbol-rate samples after a unit-energy matched filter come out with
    variance noise_psd.
    """
    if noise_psd < 0:
        raise ValueError("negative noise PSD")
    if noise_psd == 0:
        return sig
    shape = sig.samples.shape
    std = math.sqrt(noise_psd / sig.dt / 2.0)
    noise = std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return AnalogGrid(sig.samples + noise, sig.symbol_interval, sig.rate, sig.start_time)


def unit_noise_grid(n_samples: int, symbol_interval: float, rate: int,
                    rng: np.random.Generator) -> AnalogGrid:
    """White noise grid calibrated to unit post-matched-filter variance."""
    dt = symbol_interval / rate
    std = math.sqrt(1.0 / dt / 2.0)
    noise = std * (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples))
    return AnalogGrid(noise, symbol_interval, rate, 0.0)


def save_channel(ch: PathChannel) -> str:
    """Serialize a realization as a self-describing text record."""
    lines = ["damsim-channel v1",
             f"m {ch.m_antennas}",
             f"l {ch.n_paths}",
             f"t {float(ch.symbol_interval)!r}"]
    for l in range(ch.n_paths):
        lines.append(f"path {l}")
        lines.append(f"delay {float(ch.delays[l])!r}")
        parts = []
        for v in ch.gains[:, l]:
            parts.append(repr(float(v.real)))
            parts.append(repr(float(v.imag)))
        lines.append("gains " + " ".join(parts))
    return "\n".join(lines) + "\n"


def load_channel(text: str) -> PathChannel:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0] != "damsim-channel v1":
        raise ValueError("not a damsim channel record")
    header = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("path "):
        key, val = lines[i].split(None, 1)
        header[key] = val
        i += 1
    m, L, T = int(header["m"]), int(header["l"]), float(header["t"])
    gains = np.zeros((m, L), dtype=np.complex128)
    delays = np.zeros(L)
    while i < len(lines):
        path_idx = int(lines[i].split()[1])
        delays[path_idx] = float(lines[i + 1].split()[1])
        vals = [float(v) for v in lines[i + 2].split()[1:]]
        if len(vals) != 2 * m:
            raise ValueError("gain vector length mismatch")
        arr = np.array(vals).reshape(m, 2)
        gains[:, path_idx] = arr[:, 0] + 1j * arr[:, 1]
        i += 3
    return PathChannel(gains, delays, T)
