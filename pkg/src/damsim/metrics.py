"""Figures of merit: analytic SINR for integer-compensated transmission,
spectral efficiency with scheme overheads, analog-domain PAPR, and pooled
symbol error rates with confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerSet
from .channel import PathChannel, decompose_delay
from .dsp import PulseBank
from .tx import TxFrame


@dataclass(frozen=True)
class SinrBreakdown:
    desired_power: float
    isi_power: float
    noise_power: float

    @property
    def sinr(self) -> float:
        return self.desired_power / (self.isi_power + self.noise_power)

    @property
    def sinr_db(self) -> float:
        return 10 * math.log10(self.sinr)


@dataclass(frozen=True)
class OverheadModel:
    scheme: str
    fraction: float

    def __post_init__(self):
        if not 0 <= self.fraction < 1:
            raise ValueError("overhead fraction out of [0, 1)")


def dam_overhead(rolloff: float) -> OverheadModel:
    """Guard overhead of the single-carrier schemes: beta / (1 + beta)."""
    return OverheadModel("dam", rolloff / (1 + rolloff))


def ofdm_overhead(n_subcarriers: int, cp_length: int) -> OverheadModel:
    """Cyclic-prefix overhead: N_cp / (N_sc + N_cp)."""
    return OverheadModel("ofdm", cp_length / (n_subcarriers + cp_length))


def sinr_idam_analytic(ch: PathChannel, bf: BeamformerSet, bank: PulseBank,
                       noise_psd: float) -> SinrBreakdown:
    """Closed-form SINR of integer-compensated transmission.

    Residual sub-symbol delays shift each path's matched-filter sampling off
    the cascade peak: the desired term collects the off-peak cascade values,
    the interference term sums the symbol-spaced leakage over the pulse
    support. Cross-path coupling is kept, so non-orthogonal beamformers
    (mrt, mmse) are covered; with zero-forcing it collapses to the diagonal
    per-path sum.
    """
    T = ch.symbol_interval
    dec = [decompose_delay(t, T) for t in ch.delays]
    residues = np.array([d.residue for d in dec])
    taps = np.array([d.tap for d in dec])
    coupling = ch.gains.conj().T @ bf.vectors   # coupling[l, lp] = gains_l^H f_lp
    L = ch.n_paths

    def coeff(m: int) -> complex:
        amp = 0.0 + 0.0j
        for l in range(L):
            for lp in range(L):
                t_off = (m - (taps[l] - taps[lp])) * T - residues[l]
                amp += coupling[l, lp] * bank.nyquist_sample(t_off)
        return amp

    reach = bank.span + int(taps.max() - taps.min()) + 1
    desired = abs(coeff(0)) ** 2
    isi = sum(abs(coeff(m)) ** 2 for m in range(-reach, reach + 1) if m != 0)
    return SinrBreakdown(float(desired), float(isi), float(noise_psd))


def ideal_dam_snr(ch: PathChannel, bf: BeamformerSet, noise_psd: float) -> float:
    """Interference-free benchmark |sum_l gains_l^H f_l|^2 / noise."""
    return abs(bf.coherent_gain(ch)) ** 2 / noise_psd


def spectral_efficiency(sinr_linear, overhead: OverheadModel) -> float:
    """Log-form rate with the scheme's guard-time prefactor.

    Accepts a scalar SINR (single-carrier) or a per-subcarrier array
    (multicarrier, averaged across subcarriers).
    """
    gamma = np.asarray(sinr_linear, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("negative SINR")
    return float((1 - overhead.fraction) * np.mean(np.log2(1 + gamma)))


def papr(frame: TxFrame) -> np.ndarray:
    """Per-antenna peak-to-average power ratio (dB) over the frame body.

    The pulse ramp-up/down at the frame edges is excluded; antennas with no
    power are rejected.
    """
    x = np.atleast_2d(frame.grid.samples)
    body = x[:, frame.body_slice()]
    if body.shape[1] == 0:
        raise ValueError("frame too short for PAPR measurement")
    p = np.abs(body) ** 2
    mean = p.mean(axis=1)
    if np.any(mean == 0):
        raise ValueError("zero-power antenna in PAPR measurement")
    return 10 * np.log10(p.max(axis=1) / mean)


def papr_ccdf(samples_db, thresholds_db) -> np.ndarray:
    """Pr(PAPR > threshold) over pooled per-antenna samples."""
    s = np.asarray(samples_db, dtype=float).ravel()
    th = np.asarray(thresholds_db, dtype=float).ravel()
    return np.array([(s > t).mean() for t in th])


def ccdf_level(samples_db, probability: float) -> float:
    """PAPR value exceeded with the given probability (empirical quantile)."""
    s = np.sort(np.asarray(samples_db, dtype=float).ravel())
    if s.size == 0:
        raise ValueError("no PAPR samples")
    return float(np.quantile(s, 1 - probability))


@dataclass(frozen=True)
class SerEstimate:
    errors: int
    symbols: int

    @property
    def rate(self) -> float:
        return self.errors / self.symbols if self.symbols else 0.0

    def wilson_interval(self, z: float = 1.959963984540054):
        """95% Wilson score interval (lo, hi)."""
        n, p = self.symbols, self.rate
        if n == 0:
            return (0.0, 1.0)
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        return (max(0.0, center - half), min(1.0, center + half))


def pooled_ser(error_counts, symbol_counts) -> SerEstimate:
    if len(error_counts) == 0:
        raise ValueError("no reports to pool")
    return SerEstimate(int(np.sum(error_counts)), int(np.sum(symbol_counts)))
