"""Path-based beamformers for delay-aligned transmission, plus the
per-subcarrier maximum-ratio beamformer used by the multicarrier baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PathChannel


@dataclass(frozen=True)
class BeamformerSet:
    """One beamforming vector per path under a total power budget."""

    vectors: np.ndarray      # (m_antennas, n_paths)
    power_budget: float      # sum of squared norms equals this
    label: str

    def __post_init__(self):
        self.vectors.setflags(write=False)

    @property
    def n_paths(self) -> int:
        return self.vectors.shape[1]

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))

    def coherent_gain(self, ch: PathChannel) -> complex:
        """sum_l gains_l^H f_l; the aligned-path amplitude at the receiver."""
        return complex(np.sum(np.einsum("ml,ml->l", ch.gains.conj(), self.vectors)))


@dataclass(frozen=True)
class SubcarrierBeamformerSet:
    """Unit-norm per-subcarrier vectors and the resulting scalar gains."""

    vectors: np.ndarray          # (m_antennas, n_subcarriers)
    equivalent_gain: np.ndarray  # (n_subcarriers,) real >= 0
    flagged_nulls: np.ndarray    # bool mask of deep-null subcarriers

    def __post_init__(self):
        self.vectors.setflags(write=False)
        self.equivalent_gain.setflags(write=False)


def _scale_to_budget(vectors: np.ndarray, power_budget: float) -> np.ndarray:
    total = np.sum(np.abs(vectors) ** 2)
    if total == 0:
        raise ValueError("zero channel: cannot meet a positive power budget")
    return vectors * np.sqrt(power_budget / total)


def zf_beamformers(ch: PathChannel, power_budget: float = 1.0) -> BeamformerSet:
    """Zero-forcing across paths: gains_l^H f_l' = 0 for l != l'.

    A single positive scalar sets the power budget, so every path sees the
    same real gain gains_l^H f_l.
    """
    H = ch.gains
    gram = H.conj().T @ H
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError("rank-deficient path matrix")
    F = H @ np.linalg.inv(gram)
    return BeamformerSet(_scale_to_budget(F, power_budget), power_budget, "zf")


def mrt_beamformers(ch: PathChannel, power_budget: float = 1.0) -> BeamformerSet:
    """Per-path maximum ratio transmission: f_l along gains_l, common scale."""
    return BeamformerSet(_scale_to_budget(ch.gains.copy(), power_budget),
                         power_budget, "mrt")


def rzf_beamformers(ch: PathChannel, power_budget: float, noise_psd: float) -> BeamformerSet:
    """Regularized zero-forcing (the "mmse" label): diagonal loading
    n_paths * noise_psd / budget interpolates between the zf and mrt sets."""
    H = ch.gains
    L = ch.n_paths
    gram = H.conj().T @ H + (L * noise_psd / power_budget) * np.eye(L)
    F = H @ np.linalg.inv(gram)
    return BeamformerSet(_scale_to_budget(F, power_budget), power_budget, "mmse")


def dam_beamformers(ch: PathChannel, label: str, power_budget: float = 1.0,
                    noise_psd: float = 0.0) -> BeamformerSet:
    if label == "zf":
        return zf_beamformers(ch, power_budget)
    if label == "mrt":
        return mrt_beamformers(ch, power_budget)
    if label == "mmse":
        return rzf_beamformers(ch, power_budget, noise_psd)
    raise ValueError(f"unknown beamformer label: {label!r}")


def subcarrier_frequencies(n_subcarriers: int, symbol_interval: float) -> np.ndarray:
    """Signed physical baseband frequency of each subcarrier index."""
    return np.fft.fftfreq(n_subcarriers, d=symbol_interval)


def frequency_domain_channel(ch: PathChannel, n_subcarriers: int) -> np.ndarray:
    """Per-subcarrier effective channel vector c_k (shape m x n_subcarriers).

    Convention: a tone at physical frequency f arrives with row response
    c(f)^H where c(f) = sum_l gains_l exp(+j 2 pi f tau_l), matching the
    delay-sum receive model in apply_channel.
    """
    f = subcarrier_frequencies(n_subcarriers, ch.symbol_interval)
    phase = np.exp(2j * np.pi * ch.delays[:, None] * f[None, :])  # (L, n_sc)
    return ch.gains @ phase  # (m, n_sc)


def ofdm_mrt_beamformers(ch: PathChannel, n_subcarriers: int) -> SubcarrierBeamformerSet:
    """Matched (maximum-ratio) unit-norm beamformer per subcarrier.

    The equivalent scalar channel is the per-subcarrier channel norm; deep
    nulls get an arbitrary unit vector and are flagged.
    """
    c = frequency_domain_channel(ch, n_subcarriers)
    norms = np.linalg.norm(c, axis=0)
    nulls = norms < 1e-12
    vectors = np.empty_like(c)
    safe = ~nulls
    vectors[:, safe] = c[:, safe] / norms[safe]
    if np.any(nulls):
        fallback = np.zeros(ch.m_antennas, dtype=np.complex128)
        fallback[0] = 1.0
        vectors[:, nulls] = fallback[:, None]
    return SubcarrierBeamformerSet(vectors, norms, nulls)
