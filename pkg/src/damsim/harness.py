"""Campaign configuration, Monte-Carlo execution across schemes and SNRs,
and deterministic CSV persistence."""
from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import metrics
from .beamforming import dam_beamformers, ofdm_mrt_beamformers, zf_beamformers
from .channel import (AnalogGrid, PathChannel, apply_channel, generate_channel,
                      unit_noise_grid)
from .core import (SymbolStream, bits_per_symbol, detect_symbols, make_rng,
                   map_bits_to_symbols, random_bits, trial_seed)
from .dsp import FarrowFilter, choose_upsampling_factor, design_pulse, matched_filter
from .rx import (OFDM_WINDOW_ADVANCE, make_dam_schedule, measure_sinr_empirical,
                 ofdm_demodulate, ofdm_symbol_schedule, sample_grid)
from .tx import (ofdm_symbol_sequence, plan_fdam, plan_idam, transmit_fdam,
                 transmit_idam, transmit_ofdm)

DAM_SCHEMES = ("idam", "fdam")
ALL_SCHEMES = ("idam", "fdam", "ofdm")
DAM_BEAMFORMERS = ("zf", "mmse", "mrt")

CSV_HEADER = ("scheme,beamformer,snr_db,trial,ser,sinr_emp_db,sinr_ana_db,"
              "se_bps_hz,papr_p50_db,papr_p99_db,seed")

# seed-stream tags (see core.trial_seed)
_STREAM_CHANNEL = 0
_STREAM_BITS = 1
_STREAM_PILOT = 2
_STREAM_NOISE = {"idam": 3, "fdam": 4, "ofdm": 5}


@dataclass(frozen=True)
class CampaignConfig:
    """Flat campaign description; field names double as config-file keys."""

    m: int = 64                      # transmit antennas
    l: int = 3                       # channel paths
    t: float = 2.5e-9                # symbol interval, seconds
    fc: float = 28e9                 # carrier frequency, metadata only
    beta: float = 0.05               # pulse roll-off
    span: int = 48                   # transmit-pulse span, symbols
    o: int = 16                      # analog-grid samples per symbol
    q: int = 2                       # upsampling factor for fractional compensation
    farrow_order: int = 9            # Lagrange interpolator order
    delay_min_t: float = 0.0         # delay range, units of t
    delay_max_t: float = 200.0
    constellation: str = "16qam"
    n_sc: int = 1024                 # subcarriers per multicarrier block
    n_cp: int = 200                  # cyclic-prefix length, symbols
    frame_symbols: int = 1024        # counted symbols per realization
    trials: int = 500
    snr_db: tuple = tuple(range(0, 21, 2))
    schemes: tuple = ("fdam", "idam", "ofdm")
    beamformers: tuple = ("zf",)
    seed: int = 20240811
    integer_delays: bool = False
    out: str = "results.csv"


def validate_config(cfg: CampaignConfig) -> list[str]:
    """Collect every invariant violation; empty list means valid."""
    errors = []
    if cfg.m < 1 or cfg.l < 1 or cfg.m < cfg.l:
        errors.append(f"need m >= l >= 1, got m={cfg.m}, l={cfg.l}")
    if cfg.t <= 0:
        errors.append("symbol interval t must be positive")
    if not 0 <= cfg.beta <= 1:
        errors.append(f"beta={cfg.beta} outside [0, 1]")
    q_min = choose_upsampling_factor(cfg.beta) if 0 <= cfg.beta <= 1 else 1
    if cfg.q < q_min:
        errors.append(f"q={cfg.q} below the bandwidth bound ceil(1.25*(1+beta))={q_min}")
    if cfg.o % cfg.q != 0:
        errors.append(f"o={cfg.o} is not a multiple of q={cfg.q}")
    if cfg.o < 4:
        errors.append(f"o={cfg.o} must be at least 4")
    if cfg.span <= 0 or cfg.span % 2 != 0:
        errors.append(f"span={cfg.span} must be a positive even symbol count")
    if cfg.farrow_order < 1 or cfg.farrow_order % 2 == 0:
        errors.append(f"farrow_order={cfg.farrow_order} must be odd and >= 1")
    if cfg.delay_min_t < 0 or cfg.delay_max_t < cfg.delay_min_t:
        errors.append("degenerate delay range")
    try:
        bits_per_symbol(cfg.constellation)
    except ValueError as exc:
        errors.append(str(exc))
    if cfg.trials < 1:
        errors.append("trials must be >= 1")
    if len(cfg.snr_db) == 0 or not all(np.isfinite(list(cfg.snr_db))):
        errors.append("snr grid must be finite and non-empty")
    unknown = [s for s in cfg.schemes if s not in ALL_SCHEMES]
    if unknown:
        errors.append(f"unknown schemes: {unknown}")
    unknown_bf = [b for b in cfg.beamformers if b not in DAM_BEAMFORMERS]
    if unknown_bf:
        errors.append(f"unknown beamformers: {unknown_bf}")
    if not cfg.beamformers:
        errors.append("at least one beamformer required")
    if "ofdm" in cfg.schemes and cfg.frame_symbols != cfg.n_sc:
        errors.append(f"frame_symbols={cfg.frame_symbols} must equal n_sc={cfg.n_sc} "
                      "when the multicarrier baseline is enabled")
    if cfg.frame_symbols < 1:
        errors.append("frame_symbols must be >= 1")
    if cfg.n_sc < 2 or cfg.n_cp < 0:
        errors.append("need n_sc >= 2 and n_cp >= 0")
    if cfg.n_cp <= OFDM_WINDOW_ADVANCE and "ofdm" in cfg.schemes:
        errors.append(f"n_cp={cfg.n_cp} must exceed the window advance "
                      f"{OFDM_WINDOW_ADVANCE}")
    return errors


def integer_delay_mode(cfg: CampaignConfig) -> CampaignConfig:
    """Same campaign, but every drawn delay rounds to a multiple of t."""
    return dataclasses.replace(cfg, integer_delays=True)


@dataclass(frozen=True)
class TrialResult:
    scheme: str
    beamformer: str
    snr_db: float
    trial: int
    ser: float
    sinr_emp_db: float
    sinr_ana_db: float
    se_bps_hz: float
    papr_p50_db: float
    papr_p99_db: float
    seed: int

    def to_csv_row(self) -> str:
        return ",".join([
            self.scheme, self.beamformer, _fmt(self.snr_db), str(self.trial),
            _fmt(self.ser), _fmt(self.sinr_emp_db), _fmt(self.sinr_ana_db),
            _fmt(self.se_bps_hz), _fmt(self.papr_p50_db), _fmt(self.papr_p99_db),
            str(self.seed)])


def _fmt(x: float) -> str:
    return f"{float(x):.10g}"


def _noise_psd_for_snr(ref_gain_sq: float, snr_db: float, bits: int) -> float:
    # per-bit received-SNR axis: the scheme's interference-free symbol SNR
    # equals bits_per_symbol * 10^(snr/10); ref_gain_sq is the scheme's own
    # received power gain (coherent-sum for delay alignment, mean subcarrier
    # gain for the multicarrier baseline)
    return ref_gain_sq / (bits * 10 ** (snr_db / 10.0))


def _percentiles(samples: np.ndarray):
    return float(np.percentile(samples, 50)), float(np.percentile(samples, 99))


def _stream_channel(frame, ch: PathChannel) -> PathChannel:
    """Collapse the antenna dimension: the channel seen by the per-path
    streams is an equivalent array whose gains are the path/stream couplings
    gains_p^H f_s (same delays)."""
    coupling = ch.gains.conj().T @ frame.stream_weights   # (path, stream)
    return PathChannel(coupling.conj().T.copy(), ch.delays.copy(),
                       ch.symbol_interval)


def _propagate_symbol_matrix(seq: np.ndarray, bank, ch: PathChannel) -> AnalogGrid:
    """Pulse-shape + propagate a per-antenna symbol matrix, all in the
    frequency domain.

    Exact counterpart of apply_channel(shape_streams(seq, 1, bank), ch):
    symbol-rate transforms are combined across antennas per path, tiled up
    to the grid rate (zero insertion is spectral tiling) and multiplied by
    the pulse transform and the delay phase ramps.
    """
    seq = np.atleast_2d(seq)
    m, n_seq = seq.shape
    O = bank.rate
    dt = bank.dt
    extra = int(math.ceil(ch.tau_max / dt)) if ch.tau_max > 0 else 0
    n_out = (n_seq - 1) * O + bank.tx_taps.size + extra
    n_sym_pad = sfft.next_fast_len(n_seq + bank.span
                                   + int(math.ceil(extra / O)) + 4)
    n_grid_pad = n_sym_pad * O
    B = sfft.fft(seq, n_sym_pad, axis=1)
    comb = ch.gains.conj().T @ B                       # (n_paths, n_sym_pad)
    f = sfft.fftfreq(n_grid_pad, d=dt)
    Y = np.zeros(n_grid_pad, dtype=np.complex128)
    for p in range(ch.n_paths):
        Y += np.tile(comb[p], O) * np.exp(-2j * np.pi * f * ch.delays[p])
    Y *= sfft.fft(bank.tx_taps.astype(np.complex128), n_grid_pad)
    y = sfft.ifft(Y)[:n_out]
    return AnalogGrid(y, bank.symbol_interval, O, 0.0)


class _DamRun:
    """Noiseless receive pass for one (trial, scheme, beamformer)."""

    def __init__(self, scheme, frame, ch, bank, payload, guard):
        self.scheme = scheme
        self.frame = frame
        self.payload = payload
        self.guard = guard
        y0 = apply_channel(frame.stream_grids, _stream_channel(frame, ch))
        self.n_grid = y0.n_samples
        sched = make_dam_schedule(frame, ch, bank, len(payload))
        r0, self.snap = sample_grid(matched_filter(y0, bank), sched)
        self.sched = sched
        self.r0 = r0
        sl = slice(guard, guard + (len(payload) - 2 * guard))
        self.counted = sl
        self.emp = measure_sinr_empirical(r0[sl], SymbolStream(payload.symbols[sl],
                                                               payload.constellation), 0.0)
        # least-squares amplitude doubles as the known coherent gain
        denom = np.vdot(payload.symbols[sl], payload.symbols[sl])
        self.gain = complex(np.vdot(payload.symbols[sl], r0[sl]) / denom)
        self.papr_samples = metrics.papr(frame)


def run_campaign(cfg: CampaignConfig, progress=None):
    """Run the full campaign; returns (results, csv_text).

    One channel realization and payload per trial is shared across all
    schemes and SNR points. Noise is drawn once per (trial, scheme) at unit
    PSD and scaled per SNR point, which keeps the comparison paired and the
    output deterministic under a fixed seed.
    """
    violations = validate_config(cfg)
    if violations:
        raise ValueError("invalid campaign config:\n  " + "\n  ".join(violations))
    bank = design_pulse(cfg.beta, cfg.span, cfg.o, cfg.t)
    farrow = FarrowFilter(cfg.farrow_order)
    bits = bits_per_symbol(cfg.constellation)
    guard = cfg.span
    payload_len = cfg.frame_symbols + 2 * guard
    dam_oh = metrics.dam_overhead(cfg.beta)
    ofdm_oh = metrics.ofdm_overhead(cfg.n_sc, cfg.n_cp)
    quantum = cfg.t if cfg.integer_delays else cfg.t / cfg.o
    results: list[TrialResult] = []

    for trial in range(cfg.trials):
        ch_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_CHANNEL))
        ch = generate_channel(cfg.m, cfg.l, cfg.t,
                              (cfg.delay_min_t * cfg.t, cfg.delay_max_t * cfg.t),
                              ch_rng, delay_quantum=quantum)
        bit_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_BITS))
        payload = map_bits_to_symbols(random_bits(payload_len * bits, bit_rng),
                                      cfg.constellation)
        counted = slice(guard, guard + cfg.frame_symbols)
        zf = zf_beamformers(ch, 1.0)
        noise_by_scheme = {}

        def noise_samples(scheme, run_sched, n_grid):
            key = scheme
            if key not in noise_by_scheme:
                rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_NOISE[scheme]))
                noise_by_scheme[key] = unit_noise_grid(n_grid, cfg.t, cfg.o, rng)
            v = matched_filter(noise_by_scheme[key], bank)
            return sample_grid(v, run_sched)[0]

        # --- single-carrier schemes ---
        for bf_label in cfg.beamformers:
            snr_groups = ([[s] for s in cfg.snr_db] if bf_label == "mmse"
                          else [list(cfg.snr_db)])
            for group in snr_groups:
                psd_load = _noise_psd_for_snr(abs(zf.coherent_gain(ch)) ** 2,
                                              group[0], bits)
                bf = (zf if bf_label == "zf"
                      else dam_beamformers(ch, bf_label, 1.0, noise_psd=psd_load))
                plans = {"idam": plan_idam(ch), "fdam": plan_fdam(ch)}
                for scheme in (s for s in cfg.schemes if s in DAM_SCHEMES):
                    if scheme == "idam":
                        frame = transmit_idam(payload, plans["idam"], bf, bank)
                    else:
                        frame = transmit_fdam(payload, plans["fdam"], bf, bank,
                                              cfg.q, farrow)
                    run = _DamRun(scheme, frame, ch, bank, payload, guard)
                    v1 = noise_samples(scheme, run.sched, run.n_grid)
                    p50, p99 = _percentiles(run.papr_samples)
                    if scheme == "idam":
                        ana = metrics.sinr_idam_analytic(ch, bf, bank, 1.0)
                    coh_sq = abs(bf.coherent_gain(ch)) ** 2
                    for snr in group:
                        psd = _noise_psd_for_snr(coh_sq, snr, bits)
                        sigma = math.sqrt(psd)
                        eq = (run.r0 + sigma * v1) / run.gain
                        _, errors = detect_symbols(eq[counted], cfg.constellation,
                                                   payload.symbols[counted])
                        gamma_emp = run.emp.desired_power / (
                            run.emp.interference_power + psd)
                        if scheme == "idam":
                            gamma_ana = ana.desired_power / (ana.isi_power + psd)
                        else:
                            gamma_ana = coh_sq / psd
                        results.append(TrialResult(
                            scheme, bf_label, float(snr), trial,
                            errors / cfg.frame_symbols,
                            10 * math.log10(gamma_emp), 10 * math.log10(gamma_ana),
                            metrics.spectral_efficiency(gamma_emp, dam_oh),
                            p50, p99, trial_seed(cfg.seed, trial, _STREAM_CHANNEL)))

        # --- multicarrier baseline ---
        if "ofdm" in cfg.schemes:
            bf_sc = ofdm_mrt_beamformers(ch, cfg.n_sc)
            pilot_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_PILOT))
            pilot = np.exp(0.5j * np.pi * pilot_rng.integers(0, 4, cfg.n_sc)
                           + 0.25j * np.pi)
            pilot_stream = SymbolStream(pilot, cfg.constellation)
            block = SymbolStream(payload.symbols[counted], cfg.constellation)
            pilot_seq = ofdm_symbol_sequence(pilot_stream, bf_sc, cfg.n_sc, cfg.n_cp)
            data_frame = transmit_ofdm(block, bf_sc, cfg.n_sc, cfg.n_cp, bank)
            sched = ofdm_symbol_schedule(data_frame, bank, cfg.n_sc, cfg.n_cp)
            y0p = _propagate_symbol_matrix(pilot_seq, bank, ch)
            y0d = _propagate_symbol_matrix(
                ofdm_symbol_sequence(block, bf_sc, cfg.n_sc, cfg.n_cp), bank, ch)
            gains_eq = ofdm_demodulate(y0p, bank, sched) / pilot
            spec0 = ofdm_demodulate(y0d, bank, sched)
            noise_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_NOISE["ofdm"]))
            vgrid = unit_noise_grid(y0d.n_samples, cfg.t, cfg.o, noise_rng)
            v1 = ofdm_demodulate(vgrid, bank, sched)
            eq0 = spec0 / gains_eq
            emp = measure_sinr_empirical(eq0, block, 0.0)
            papr_samples = metrics.papr(data_frame)
            p50, p99 = _percentiles(papr_samples)
            mean_gain_sq = float(np.mean(np.abs(gains_eq) ** 2))
            for snr in cfg.snr_db:
                psd = _noise_psd_for_snr(mean_gain_sq, snr, bits)
                sigma = math.sqrt(psd)
                eq = (spec0 + sigma * v1) / gains_eq
                _, errors = detect_symbols(eq, cfg.constellation, block.symbols)
                gamma_k = np.abs(gains_eq) ** 2 / psd
                # effective single-number SINR: desired/.. on the equalized
                # stream, noise averaged over the per-subcarrier inflation
                noise_eq = psd * float(np.mean(1.0 / np.abs(gains_eq) ** 2))
                gamma_emp = emp.desired_power / (emp.interference_power + noise_eq)
                results.append(TrialResult(
                    "ofdm", "mrt_sc", float(snr), trial,
                    errors / cfg.n_sc,
                    10 * math.log10(gamma_emp),
                    10 * math.log10(float(np.mean(gamma_k))),
                    metrics.spectral_efficiency(gamma_k, ofdm_oh),
                    p50, p99, trial_seed(cfg.seed, trial, _STREAM_CHANNEL)))
        if progress is not None:
            progress(trial + 1, cfg.trials)

    results.sort(key=lambda r: (r.scheme, r.beamformer, r.snr_db, r.trial))
    return results, render_csv(cfg, results)


def render_csv(cfg: CampaignConfig, results) -> str:
    buf = io.StringIO()
    buf.write("# damsim-results v1\n")
    buf.write("# snr_axis = per-bit received SNR: noise PSD set per realization so "
              "the scheme's interference-free symbol SNR equals "
              "bits_per_symbol * 10^(snr_db/10)\n")
    buf.write("# snr_ref_gain: delay-aligned schemes use |coherent path sum|^2 of "
              "the row's beamformer; the multicarrier baseline uses its mean "
              "subcarrier power gain\n")
    buf.write("# papr = per-antenna over the frame body, pooled p50/p99 per trial\n")
    buf.write(f"# symbols_counted_per_trial = {cfg.frame_symbols}\n")
    cfg_items = " ".join(f"{f.name}={getattr(cfg, f.name)!r}".replace(" ", "")
                         for f in dataclasses.fields(cfg))
    buf.write(f"# config: {cfg_items}\n")
    buf.write(CSV_HEADER + "\n")
    for r in results:
        buf.write(r.to_csv_row() + "\n")
    return buf.getvalue()


def run_papr_only(cfg: CampaignConfig):
    """Transmit-side-only pass collecting per-antenna PAPR samples.

    Returns a list of (scheme, trial, antenna, papr_db) tuples and the CSV
    text (schema: scheme,trial,antenna,papr_db).
    """
    violations = validate_config(cfg)
    if violations:
        raise ValueError("invalid campaign config:\n  " + "\n  ".join(violations))
    bank = design_pulse(cfg.beta, cfg.span, cfg.o, cfg.t)
    farrow = FarrowFilter(cfg.farrow_order)
    bits = bits_per_symbol(cfg.constellation)
    guard = cfg.span
    payload_len = cfg.frame_symbols + 2 * guard
    quantum = cfg.t if cfg.integer_delays else cfg.t / cfg.o
    rows = []
    for trial in range(cfg.trials):
        ch_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_CHANNEL))
        ch = generate_channel(cfg.m, cfg.l, cfg.t,
                              (cfg.delay_min_t * cfg.t, cfg.delay_max_t * cfg.t),
                              ch_rng, delay_quantum=quantum)
        bit_rng = make_rng(trial_seed(cfg.seed, trial, _STREAM_BITS))
        payload = map_bits_to_symbols(random_bits(payload_len * bits, bit_rng),
                                      cfg.constellation)
        counted = slice(guard, guard + cfg.frame_symbols)
        for scheme in cfg.schemes:
            if scheme in DAM_SCHEMES:
                bf = zf_beamformers(ch, 1.0)
                if scheme == "idam":
                    frame = transmit_idam(payload, plan_idam(ch), bf, bank)
                else:
                    frame = transmit_fdam(payload, plan_fdam(ch), bf, bank,
                                          cfg.q, farrow)
            else:
                bf_sc = ofdm_mrt_beamformers(ch, cfg.n_sc)
                block = SymbolStream(payload.symbols[counted], cfg.constellation)
                frame = transmit_ofdm(block, bf_sc, cfg.n_sc, cfg.n_cp, bank)
            for ant, val in enumerate(metrics.papr(frame)):
                rows.append((scheme, trial, ant, float(val)))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    buf = io.StringIO()
    buf.write("# damsim-papr v1\n")
    buf.write("scheme,trial,antenna,papr_db\n")
    for scheme, trial, ant, val in rows:
        buf.write(f"{scheme},{trial},{ant},{_fmt(val)}\n")
    return rows, buf.getvalue()


# --- config file handling -------------------------------------------------

_LIST_FIELDS = {"snr_db", "schemes", "beamformers"}


def parse_config_text(text: str) -> CampaignConfig:
    """Parse the flat key = value config format; unknown keys are rejected."""
    fields = {f.name: f for f in dataclasses.fields(CampaignConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _parse_value(key, val)
    return CampaignConfig(**values)


def _parse_value(key: str, val: str):
    if key in ("schemes", "beamformers"):
        return tuple(v.strip() for v in val.split(",") if v.strip())
    if key == "snr_db":
        return tuple(float(v) for v in val.split(",") if v.strip())
    if key == "integer_delays":
        if val.lower() in ("true", "1", "yes"):
            return True
        if val.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean for {key}: {val!r}")
    if key in ("m", "l", "span", "o", "q", "farrow_order", "n_sc", "n_cp",
               "frame_symbols", "trials", "seed"):
        return int(val)
    if key in ("t", "fc", "beta", "delay_min_t", "delay_max_t"):
        return float(val)
    return val


def format_config(cfg: CampaignConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in _LIST_FIELDS or isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
