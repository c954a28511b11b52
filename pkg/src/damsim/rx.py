"""Receiver chains: matched filtering, symbol-instant sampling and detection
for the delay-aligned schemes; window + DFT + single-tap equalization for the
multicarrier baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AnalogGrid, PathChannel, decompose_delay
from .core import SymbolStream, detect_symbols
from .dsp import PulseBank, matched_filter
from .tx import TxFrame

# DFT window advance into the cyclic prefix (symbols); absorbs pulse tails
# of paths arriving near the maximum supported delay.
OFDM_WINDOW_ADVANCE = 8


@dataclass(frozen=True)
class SamplingSchedule:
    """Uniform symbol-rate sampling instants on the analog grid."""

    first_instant: float     # seconds
    period: float            # seconds (the symbol interval)
    count: int

    def instants(self) -> np.ndarray:
        return self.first_instant + np.arange(self.count) * self.period


@dataclass(frozen=True)
class RxReport:
    detected: SymbolStream
    raw: np.ndarray              # sampled matched-filter outputs, unscaled
    error_count: int | None
    quantization_error: float    # worst schedule-to-grid snap, seconds
    noise_var_measured: float | None = None


def dam_alignment_delay(frame: TxFrame, ch: PathChannel) -> float:
    """Channel-side delay common to all aligned path copies."""
    if frame.scheme == "idam":
        taps = [decompose_delay(t, ch.symbol_interval).tap for t in ch.delays]
        return max(taps) * ch.symbol_interval
    if frame.scheme == "fdam":
        return ch.tau_max
    raise ValueError(f"not a delay-aligned scheme: {frame.scheme}")


def make_dam_schedule(frame: TxFrame, ch: PathChannel, bank: PulseBank,
                      count: int | None = None) -> SamplingSchedule:
    """Schedule aligned to the coherent arrival of symbol 0.

    First instant = frame latency (time_symbol0) + alignment delay + the
    matched filter's group delay.
    """
    t0 = frame.time_symbol0 + dam_alignment_delay(frame, ch) + bank.group_delay
    n = count if count is not None else len(frame.payload)
    return SamplingSchedule(t0, ch.symbol_interval, n)


def sample_grid(grid: AnalogGrid, sched: SamplingSchedule):
    """Nearest-grid-point sampling; returns (values, worst snap error seconds).

    The campaign constructs grids so the instants are on-grid; the snap is
    recorded and anything past half a grid step is rejected.
    """
    dt = grid.dt
    pos = (sched.instants() - grid.start_time) / dt
    idx = np.round(pos).astype(int)
    if idx.min() < 0 or idx.max() >= grid.n_samples:
        raise ValueError("sampling schedule extends outside the grid")
    snap = np.max(np.abs(pos - idx)) * dt
    if snap > dt / 2 + 1e-12:
        raise ValueError("schedule drift exceeds half a grid step")
    return grid.samples[idx], float(snap)


def receive_dam(y: AnalogGrid, bank: PulseBank, sched: SamplingSchedule,
                gain: complex = 1.0 + 0.0j, constellation_id: str = "16qam",
                reference: SymbolStream | None = None,
                edge_guard: int = 0) -> RxReport:
    """Matched filter, sample at the schedule, scale by the known coherent
    gain, then minimum-distance detection.

    edge_guard symbols at each end are excluded from the error count (the
    detected stream still covers the full schedule).
    """
    r = matched_filter(y, bank)
    raw, snap = sample_grid(r, sched)
    scaled = raw / gain
    detected, _ = detect_symbols(scaled, constellation_id)
    errors = None
    if reference is not None:
        ref = reference.symbols
        if ref.size != raw.size:
            raise ValueError("reference length mismatch")
        sl = slice(edge_guard, raw.size - edge_guard if edge_guard else None)
        _, errors = detect_symbols(scaled[sl], constellation_id, ref[sl])
    return RxReport(detected, raw, errors, snap)


def ofdm_symbol_schedule(frame: TxFrame, bank: PulseBank, n_subcarriers: int,
                         cp_length: int,
                         advance: int = OFDM_WINDOW_ADVANCE) -> SamplingSchedule:
    """Symbol-rate schedule over the DFT window, advanced into the prefix."""
    T = bank.symbol_interval
    t0 = frame.time_symbol0 + bank.group_delay + (cp_length - advance) * T
    return SamplingSchedule(t0, T, n_subcarriers)


def ofdm_demodulate(y: AnalogGrid, bank: PulseBank, sched: SamplingSchedule,
                    advance: int = OFDM_WINDOW_ADVANCE) -> np.ndarray:
    """Matched filter, sample the DFT window, undo the window rotation.

    The window starts `advance` symbols early inside the prefix; the output
    is the unitary DFT with that circular shift compensated.
    """
    r = matched_filter(y, bank)
    samples, _ = sample_grid(r, sched)
    spec = np.fft.fft(samples, norm="ortho")
    n = samples.size
    k = np.arange(n)
    # starting the window `advance` samples early rotates the body circularly
    return spec * np.exp(2j * np.pi * k * advance / n)


def receive_ofdm(y: AnalogGrid, bank: PulseBank, sched: SamplingSchedule,
                 equalizer_gains: np.ndarray, constellation_id: str = "16qam",
                 reference: SymbolStream | None = None,
                 advance: int = OFDM_WINDOW_ADVANCE) -> RxReport:
    """Single-block multicarrier receiver with known-channel equalization."""
    spec = ofdm_demodulate(y, bank, sched, advance)
    eq = spec / equalizer_gains
    detected, _ = detect_symbols(eq, constellation_id)
    errors = None
    if reference is not None:
        _, errors = detect_symbols(eq, constellation_id, reference.symbols)
    return RxReport(detected, spec, errors, 0.0)


@dataclass(frozen=True)
class EmpiricalSinr:
    desired_power: float
    interference_power: float
    noise_power: float

    @property
    def sinr(self) -> float:
        return self.desired_power / (self.interference_power + self.noise_power)

    @property
    def sinr_db(self) -> float:
        return 10 * np.log10(self.sinr)


def measure_sinr_empirical(noiseless_samples: np.ndarray, reference: SymbolStream,
                           noise_psd: float) -> EmpiricalSinr:
    """Split a noiseless receive run into desired and interference power.

    The desired amplitude is the least-squares projection of the sampled
    outputs onto the reference symbols; what remains is interference. Noise
    power comes from the calibrated PSD, not from the run itself.
    """
    ref = reference.symbols
    r = np.asarray(noiseless_samples)
    if r.size != ref.size or r.size == 0:
        raise ValueError("sample/reference length mismatch")
    denom = np.vdot(ref, ref)
    if abs(denom) < 1e-300:
        raise ValueError("degenerate reference stream")
    a = np.vdot(ref, r) / denom
    if abs(a) < 1e-300:
        raise ValueError("zero desired correlation")
    desired = abs(a) ** 2 * float(np.mean(np.abs(ref) ** 2))
    resid = r - a * ref
    interference = float(np.mean(np.abs(resid) ** 2))
    return EmpiricalSinr(float(desired), interference, float(noise_psd))
