"""Transmitter chains: integer and fractional delay-aligned single carrier,
and the pulse-shaped CP multicarrier baseline.

The per-antenna waveform of the delay-aligned schemes is a rank-L mix of
per-path scalar streams; transmitters keep those streams alongside the full
antenna grid so downstream stages can work at whichever rank is cheaper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as ssig

from .beamforming import BeamformerSet, SubcarrierBeamformerSet
from .channel import AnalogGrid, PathChannel, decompose_delay
from .core import SymbolStream
from .dsp import (DiscreteSignal, FarrowFilter, PulseBank,
                  choose_upsampling_factor, fractional_delay, upsample)


@dataclass(frozen=True)
class CompensationPlan:
    """Per-path pre-delays in symbol units; the latest path gets zero."""

    offsets: np.ndarray      # (n_paths,) >= 0, min == 0
    fractional: bool         # False: integer symbol shifts only

    def __post_init__(self):
        self.offsets.setflags(write=False)


@dataclass(frozen=True)
class TxFrame:
    """Per-antenna transmit grid plus the timing metadata receivers need.

    time_symbol0 is the grid time at which symbol 0's pulse center sits for
    the zero-compensation (latest) path; after propagation all aligned path
    copies peak at time_symbol0 + alignment delay. For the delay-aligned
    schemes, stream_grids holds the pulse-shaped per-path scalar streams and
    stream_weights the mixing vectors (grid = weights @ streams).
    """

    scheme: str
    grid: AnalogGrid
    time_symbol0: float
    payload: SymbolStream
    power_budget: float
    max_offset_symbols: float = 0.0   # largest per-path pre-delay
    sequence_symbols: int = 0         # symbol slots actually transmitted
    guard_symbols: int = 0            # pulse half-span, for ramp exclusion
    stream_grids: AnalogGrid | None = None
    stream_weights: np.ndarray | None = None

    def body_slice(self) -> slice:
        """Steady-state grid region: every path stream active, ramps excluded."""
        g = self.grid
        T = g.symbol_interval
        t_on = self.time_symbol0 + (self.max_offset_symbols + self.guard_symbols) * T
        t_off = self.time_symbol0 + (self.sequence_symbols - self.max_offset_symbols
                                     - 1 - self.guard_symbols) * T
        start = int(round(t_on / g.dt))
        stop = int(round(t_off / g.dt))
        if stop <= start:
            raise ValueError("frame too short for a steady-state body")
        return slice(start, stop)


def plan_idam(ch: PathChannel) -> CompensationPlan:
    """Integer compensation: latest symbol tap minus each path's tap."""
    taps = np.array([decompose_delay(t, ch.symbol_interval).tap for t in ch.delays])
    offsets = (taps.max() - taps).astype(float)
    return CompensationPlan(offsets, fractional=False)


def plan_fdam(ch: PathChannel) -> CompensationPlan:
    """Fractional compensation: (tau_max - tau_l) / T per path."""
    offsets = (ch.delays.max() - ch.delays) / ch.symbol_interval
    return CompensationPlan(offsets, fractional=True)


def shape_streams(streams: np.ndarray, rate_in: int, bank: PulseBank) -> AnalogGrid:
    """Pulse-shape one or more rows of rate_in samples/symbol onto the grid."""
    up = bank.rate // rate_in
    out = ssig.upfirdn(bank.tx_taps, np.atleast_2d(streams), up=up, axis=-1)
    if np.ndim(streams) == 1:
        out = out[0]
    return AnalogGrid(out, bank.symbol_interval, bank.rate, 0.0)


def _mix_frame(scheme: str, streams: AnalogGrid, weights: np.ndarray,
               t0: float, payload, budget, max_offset, seq_symbols, guard):
    grid = AnalogGrid(weights @ np.atleast_2d(streams.samples),
                      streams.symbol_interval, streams.rate, streams.start_time)
    return TxFrame(scheme, grid, t0, payload, budget, max_offset, seq_symbols,
                   guard, streams, weights)


def transmit_idam(symbols: SymbolStream, plan: CompensationPlan,
                  bf: BeamformerSet, bank: PulseBank) -> TxFrame:
    """Superpose integer-shifted symbol streams per path, then pulse-shape."""
    offsets = plan.offsets
    if np.any(offsets != np.round(offsets)):
        raise ValueError("integer-delay transmission needs integer plan entries")
    shifts = offsets.astype(int)
    s = symbols.symbols
    n_total = s.size + int(shifts.max())
    streams = np.zeros((bf.n_paths, n_total), dtype=np.complex128)
    for l in range(bf.n_paths):
        streams[l, shifts[l]:shifts[l] + s.size] = s
    shaped = shape_streams(streams, 1, bank)
    # zero-compensation path: symbol 0 at index 0, pulse center group_delay later
    return _mix_frame("idam", shaped, bf.vectors, bank.group_delay, symbols,
                      bf.power_budget, float(shifts.max()), n_total, bank.span // 2)


def transmit_fdam(symbols: SymbolStream, plan: CompensationPlan, bf: BeamformerSet,
                  bank: PulseBank, upsampling: int, farrow: FarrowFilter) -> TxFrame:
    """Upsample, fractionally pre-delay each path, beamform, pulse-shape.

    Every path passes through the same Farrow structure, so the common bulk
    delay cancels and relative path offsets are exactly the planned ones.
    """
    q_min = choose_upsampling_factor(bank.rolloff)
    if upsampling < q_min:
        raise ValueError(
            f"upsampling factor {upsampling} below the bandwidth-containment "
            f"bound ceil(1.25*(1+beta)) = {q_min}")
    if bank.rate % upsampling != 0:
        raise ValueError("grid rate must be a multiple of the upsampling factor")
    s_up = upsample(DiscreteSignal(symbols.symbols, 1, 0.0), upsampling)
    delayed = [fractional_delay(s_up, upsampling * plan.offsets[l], farrow)
               for l in range(bf.n_paths)]
    n_total = max(d.samples.size for d in delayed)
    streams = np.zeros((bf.n_paths, n_total), dtype=np.complex128)
    for l, d in enumerate(delayed):
        streams[l, :d.samples.size] = d.samples
    shaped = shape_streams(streams, upsampling, bank)
    t0 = (farrow.bulk_delay / upsampling) * bank.symbol_interval + bank.group_delay
    return _mix_frame("fdam", shaped, bf.vectors, t0, symbols, bf.power_budget,
                      float(plan.offsets.max()),
                      symbols.symbols.size + int(math.ceil(plan.offsets.max())),
                      bank.span // 2)


def ofdm_symbol_sequence(symbols: SymbolStream, bf_sc: SubcarrierBeamformerSet,
                         n_subcarriers: int, cp_length: int,
                         power_budget: float = 1.0) -> np.ndarray:
    """Beamformed CP-prefixed time sequence per antenna (m, cp + n_sc)."""
    d = symbols.symbols
    if d.size != n_subcarriers:
        raise ValueError(f"payload must be exactly {n_subcarriers} symbols per block")
    freq = bf_sc.vectors * d[None, :] * np.sqrt(power_budget)   # (m, n_sc)
    block = np.fft.ifft(freq, axis=1, norm="ortho")
    return np.concatenate([block[:, -cp_length:], block], axis=1)


def transmit_ofdm(symbols: SymbolStream, bf_sc: SubcarrierBeamformerSet,
                  n_subcarriers: int, cp_length: int, bank: PulseBank,
                  power_budget: float = 1.0) -> TxFrame:
    """One beamformed multicarrier block: unitary inverse DFT, cyclic prefix,
    then the shared transmit pulse at symbol rate."""
    with_cp = ofdm_symbol_sequence(symbols, bf_sc, n_subcarriers, cp_length,
                                   power_budget)
    grid = shape_streams(with_cp, 1, bank)
    # symbol 0 of the DFT body sits cp_length symbols into the frame
    return TxFrame("ofdm", grid, bank.group_delay, symbols, power_budget,
                   0.0, n_subcarriers + cp_length, bank.span // 2)


def mean_tx_power(frame: TxFrame) -> float:
    """Average instantaneous power over the steady-state frame body."""
    x = np.atleast_2d(frame.grid.samples)
    body = x[:, frame.body_slice()]
    return float(np.mean(np.sum(np.abs(body) ** 2, axis=0)))
