"""Transmitter chains: compensation plans, frame composition, power, spectra."""
import numpy as np
import pytest

from damsim import (FarrowFilter, PathChannel, SymbolStream, design_pulse,
                    generate_channel, make_rng, map_bits_to_symbols,
                    mean_tx_power, mrt_beamformers, ofdm_mrt_beamformers,
                    plan_fdam, plan_idam, pulse_shape, random_bits,
                    transmit_fdam, transmit_idam, transmit_ofdm, zf_beamformers)
from damsim.dsp import DiscreteSignal
from damsim.tx import ofdm_symbol_sequence

T = 2.5e-9
O = 16
BANK = design_pulse(0.05, 48, O, T)
FARROW = FarrowFilter(9)


def _channel_with_delays(delays_t, m=4):
    rng = make_rng(0)
    gains = (rng.standard_normal((m, len(delays_t)))
             + 1j * rng.standard_normal((m, len(delays_t))))
    return PathChannel(gains, np.array(delays_t) * T, T)


def _payload(n=256, seed=1):
    return map_bits_to_symbols(random_bits(4 * n, make_rng(seed)))


class TestPlans:
    def test_idam_from_taps(self):
        ch = _channel_with_delays([3.6, 10.2])
        plan = plan_idam(ch)
        assert np.array_equal(plan.offsets, [6.0, 0.0])
        assert not plan.fractional

    def test_idam_single_and_equal(self):
        assert np.array_equal(plan_idam(_channel_with_delays([7.3])).offsets, [0.0])
        assert np.array_equal(plan_idam(_channel_with_delays([5.0, 5.0])).offsets,
                              [0.0, 0.0])

    def test_fdam_exact_offsets(self):
        plan = plan_fdam(_channel_with_delays([3.6, 10.2]))
        assert np.allclose(plan.offsets, [6.6, 0.0], atol=1e-9)
        assert plan.offsets.min() == 0.0

    def test_fdam_matches_idam_on_integer_delays(self):
        ch = _channel_with_delays([3.0, 17.0, 9.0])
        assert np.allclose(plan_fdam(ch).offsets, plan_idam(ch).offsets)


class TestIntegerDam:
    def test_single_path_plain_waveform(self):
        ch = _channel_with_delays([0.0], m=4)
        bf = zf_beamformers(ch, 1.0)
        payload = _payload(64)
        frame = transmit_idam(payload, plan_idam(ch), bf, BANK)
        ref = pulse_shape(DiscreteSignal(payload.symbols, 1, 0.0), BANK)
        expect = np.outer(bf.vectors[:, 0], ref.samples)
        assert np.max(np.abs(frame.grid.samples - expect)) < 1e-12 * np.max(np.abs(expect))

    def test_two_path_superposition_on_antenna(self):
        gains = np.zeros((2, 2), dtype=complex)
        gains[0, 0] = 1.0
        gains[1, 1] = 1.0
        ch = PathChannel(gains, np.array([1.0, 0.0]) * T, T)
        e1 = np.zeros((2, 2), dtype=complex)
        e1[0, :] = 1.0   # both beams on antenna 1
        from damsim.beamforming import BeamformerSet
        bf = BeamformerSet(e1, 2.0, "custom")
        payload = _payload(32)
        frame = transmit_idam(payload, plan_idam(ch), bf, BANK)
        s = payload.symbols
        direct = pulse_shape(DiscreteSignal(s, 1, 0.0), BANK).samples
        delayed = pulse_shape(
            DiscreteSignal(np.concatenate([[0], s]), 1, 0.0), BANK).samples
        n = min(frame.grid.samples.shape[1], delayed.size)
        combined = delayed[:n].copy()
        combined[:direct.size] += direct[:n][:direct.size]
        assert np.max(np.abs(frame.grid.samples[0, :n] - combined)) < 1e-12
        assert np.max(np.abs(frame.grid.samples[1])) == 0.0

    def test_rejects_fractional_plan(self):
        ch = _channel_with_delays([3.6, 10.2])
        bf = zf_beamformers(ch, 1.0)
        with pytest.raises(ValueError, match="integer"):
            transmit_idam(_payload(16), plan_fdam(ch), bf, BANK)

    def test_mean_power_tracks_budget(self):
        ch = generate_channel(16, 3, T, (0, 50 * T), make_rng(5))
        bf = zf_beamformers(ch, 1.0)
        frame = transmit_idam(_payload(1024), plan_idam(ch), bf, BANK)
        assert abs(mean_tx_power(frame) * T - 1.0) < 0.05


class TestFractionalDam:
    def test_integer_offsets_match_idam(self):
        ch = _channel_with_delays([3.0, 10.0], m=4)
        bf = zf_beamformers(ch, 1.0)
        payload = _payload(128)
        fi = transmit_idam(payload, plan_idam(ch), bf, BANK)
        ff = transmit_fdam(payload, plan_fdam(ch), bf, BANK, 2, FARROW)
        # fractional chain is late by the common interpolator bulk delay
        shift = int(round((FARROW.bulk_delay / 2) * O / 1))
        a = fi.grid.samples
        b = ff.grid.samples[:, shift:shift + a.shape[1]]
        scale = np.max(np.abs(a))
        inner = slice(0, a.shape[1] - shift)
        assert np.max(np.abs(a[:, inner] - b[:, inner])) < 1e-6 * scale

    def test_single_path_matches_idam(self):
        ch = _channel_with_delays([4.7], m=4)
        bf = zf_beamformers(ch, 1.0)
        payload = _payload(64)
        fi = transmit_idam(payload, plan_idam(ch), bf, BANK)
        ff = transmit_fdam(payload, plan_fdam(ch), bf, BANK, 2, FARROW)
        shift = FARROW.bulk_delay * O // 2
        a = fi.grid.samples
        b = ff.grid.samples[:, shift:shift + a.shape[1]]
        n = min(a.shape[1], b.shape[1])
        assert np.max(np.abs(a[:, :n] - b[:, :n])) < 1e-6 * np.max(np.abs(a))

    def test_upsampling_bound_enforced(self):
        ch = _channel_with_delays([3.6, 10.2])
        bf = zf_beamformers(ch, 1.0)
        bank_wide = design_pulse(0.9, 16, 16, T)
        with pytest.raises(ValueError, match=r"1\.25"):
            transmit_fdam(_payload(16), plan_fdam(ch), bf, bank_wide, 2,
                          FARROW)

    def test_out_of_band_power(self):
        # composed fractional frame stays inside 1.05x the pulse bandwidth
        ch = generate_channel(8, 3, T, (0, 50 * T), make_rng(9),
                              delay_quantum=T / O)
        bf = zf_beamformers(ch, 1.0)
        frame = transmit_fdam(_payload(512, seed=3), plan_fdam(ch), bf, BANK,
                              2, FARROW)
        x = frame.grid.samples
        spec = np.fft.fft(x, 1 << 16, axis=1)
        f = np.fft.fftfreq(1 << 16, d=BANK.dt) * T
        p = np.sum(np.abs(spec) ** 2, axis=0)
        band = np.abs(f) <= 1.05 * (1 + BANK.rolloff) / 2
        ratio = p[~band].sum() / p[band].sum()
        assert 10 * np.log10(ratio) < -40

    def test_mean_power_tracks_budget(self):
        ch = generate_channel(16, 3, T, (0, 50 * T), make_rng(6),
                              delay_quantum=T / O)
        bf = zf_beamformers(ch, 1.0)
        frame = transmit_fdam(_payload(1024, seed=4), plan_fdam(ch), bf, BANK,
                              2, FARROW)
        assert abs(mean_tx_power(frame) * T - 1.0) < 0.05


class TestOfdm:
    def test_zero_payload_zero_waveform(self):
        ch = generate_channel(4, 2, T, (0, 20 * T), make_rng(1))
        bf_sc = ofdm_mrt_beamformers(ch, 64)
        zeros = SymbolStream(np.zeros(64, dtype=complex), "16qam")
        frame = transmit_ofdm(zeros, bf_sc, 64, 16, BANK)
        assert np.max(np.abs(frame.grid.samples)) == 0.0

    def test_single_subcarrier_tone(self):
        from damsim.beamforming import SubcarrierBeamformerSet
        n_sc, k = 128, 11
        vectors = np.ones((1, n_sc), dtype=complex)
        bf_sc = SubcarrierBeamformerSet(vectors, np.ones(n_sc),
                                        np.zeros(n_sc, dtype=bool))
        d = np.zeros(n_sc, dtype=complex)
        d[k] = 1.0
        frame = transmit_ofdm(SymbolStream(d, "16qam"), bf_sc, n_sc, 16, BANK)
        body = frame.grid.samples[0][frame.body_slice()]
        spec = np.abs(np.fft.fft(body))
        f = np.fft.fftfreq(body.size, d=BANK.dt)
        f_peak = abs(f[int(np.argmax(spec))])
        assert abs(f_peak - k / (n_sc * T)) < 1 / (n_sc * T)

    def test_cyclic_prefix_copies_tail(self):
        ch = generate_channel(4, 2, T, (0, 20 * T), make_rng(3))
        bf_sc = ofdm_mrt_beamformers(ch, 64)
        seq = ofdm_symbol_sequence(_payload(64, seed=5), bf_sc, 64, 16)
        assert np.array_equal(seq[:, :16], seq[:, -16:])

    def test_payload_size_mismatch(self):
        ch = generate_channel(4, 2, T, (0, 20 * T), make_rng(3))
        bf_sc = ofdm_mrt_beamformers(ch, 64)
        with pytest.raises(ValueError, match="64"):
            transmit_ofdm(_payload(32), bf_sc, 64, 16, BANK)

    def test_mean_power_tracks_budget(self):
        ch = generate_channel(16, 3, T, (0, 50 * T), make_rng(8))
        bf_sc = ofdm_mrt_beamformers(ch, 1024)
        frame = transmit_ofdm(_payload(1024, seed=6), bf_sc, 1024, 200, BANK)
        assert abs(mean_tx_power(frame) * T - 1.0) < 0.05
