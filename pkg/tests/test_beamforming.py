"""Path-based and per-subcarrier beamformers."""
import numpy as np
import pytest

from damsim import (PathChannel, frequency_domain_channel, generate_channel,
                    make_rng, mrt_beamformers, ofdm_mrt_beamformers,
                    rzf_beamformers, zf_beamformers)

T = 2.5e-9


def _random_channel(m=64, l=3, seed=0):
    return generate_channel(m, l, T, (0, 200 * T), make_rng(seed))


def _directions(vectors):
    return vectors / np.linalg.norm(vectors, axis=0, keepdims=True)


class TestZeroForcing:
    def test_cross_terms_vanish(self):
        ch = _random_channel()
        bf = zf_beamformers(ch, 1.0)
        coupling = ch.gains.conj().T @ bf.vectors
        hn = np.linalg.norm(ch.gains, axis=0)
        fn = np.linalg.norm(bf.vectors, axis=0)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert abs(coupling[i, j]) / (hn[i] * fn[j]) < 1e-9

    def test_common_positive_gain(self):
        ch = _random_channel(seed=4)
        bf = zf_beamformers(ch, 1.0)
        diag = np.diag(ch.gains.conj().T @ bf.vectors)
        assert np.allclose(diag.imag, 0, atol=1e-12 * abs(diag[0]))
        assert np.all(diag.real > 0)
        assert np.allclose(diag, diag[0])

    def test_power_budget(self):
        for seed in range(5):
            ch = _random_channel(seed=seed)
            bf = zf_beamformers(ch, 2.5)
            assert abs(bf.total_power() - 2.5) < 1e-9

    def test_orthogonal_columns_reduce_to_mrt(self):
        gains = np.zeros((8, 2), dtype=complex)
        gains[0, 0] = 1.5
        gains[3, 1] = 0.5 - 1j
        ch = PathChannel(gains, np.array([0.0, 5 * T]), T)
        zf = zf_beamformers(ch, 1.0)
        mrt = mrt_beamformers(ch, 1.0)
        z, m = _directions(zf.vectors), _directions(mrt.vectors)
        for l in range(2):
            phase = np.vdot(m[:, l], z[:, l])
            assert abs(abs(phase) - 1) < 1e-12

    def test_single_path(self):
        ch = _random_channel(m=8, l=1, seed=2)
        bf = zf_beamformers(ch, 1.0)
        d = _directions(bf.vectors)[:, 0]
        h = ch.gains[:, 0] / np.linalg.norm(ch.gains[:, 0])
        assert abs(abs(np.vdot(h, d)) - 1) < 1e-12

    def test_rank_deficient_rejected(self):
        g = make_rng(0).standard_normal((8, 1)) + 0j
        gains = np.hstack([g, g])   # duplicated column
        ch = PathChannel(gains, np.array([0.0, T]), T)
        with pytest.raises(np.linalg.LinAlgError):
            zf_beamformers(ch, 1.0)

    def test_scale_invariance(self):
        ch = _random_channel(seed=8)
        c = 0.3 - 1.1j
        scaled = PathChannel(ch.gains * c, ch.delays.copy(), T)
        bf1, bf2 = zf_beamformers(ch, 1.0), zf_beamformers(scaled, 1.0)
        d1, d2 = _directions(bf1.vectors), _directions(bf2.vectors)
        for l in range(ch.n_paths):
            assert abs(abs(np.vdot(d1[:, l], d2[:, l])) - 1) < 1e-9
        g1 = abs(bf1.coherent_gain(ch)) ** 2
        g2 = abs(bf2.coherent_gain(scaled)) ** 2
        assert abs(g2 / g1 - abs(c) ** 2) < 1e-9


class TestMrt:
    def test_directions_along_channel(self):
        ch = _random_channel(seed=1)
        bf = mrt_beamformers(ch, 1.0)
        d, h = _directions(bf.vectors), _directions(ch.gains)
        for l in range(3):
            assert abs(abs(np.vdot(h[:, l], d[:, l])) - 1) < 1e-12

    def test_equal_norm_orthogonal_split(self):
        gains = np.zeros((4, 2), dtype=complex)
        gains[0, 0] = 1.0
        gains[1, 1] = 1.0
        ch = PathChannel(gains, np.array([0.0, T]), T)
        bf = mrt_beamformers(ch, 1.0)
        norms = np.linalg.norm(bf.vectors, axis=0) ** 2
        assert np.allclose(norms, 0.5, atol=1e-12)

    def test_power_budget(self):
        ch = _random_channel(seed=6)
        assert abs(mrt_beamformers(ch, 1.0).total_power() - 1.0) < 1e-9

    def test_zero_channel_rejected(self):
        ch = PathChannel(np.zeros((4, 1), dtype=complex), np.array([0.0]), T)
        with pytest.raises(ValueError):
            mrt_beamformers(ch, 1.0)


class TestRegularizedZf:
    def test_limits(self):
        ch = _random_channel(seed=3)
        zf_d = _directions(zf_beamformers(ch, 1.0).vectors)
        mrt_d = _directions(mrt_beamformers(ch, 1.0).vectors)
        tiny = _directions(rzf_beamformers(ch, 1.0, 1e-12).vectors)
        huge = _directions(rzf_beamformers(ch, 1.0, 1e12).vectors)
        for l in range(3):
            assert abs(abs(np.vdot(tiny[:, l], zf_d[:, l])) - 1) < 1e-6
            assert abs(abs(np.vdot(huge[:, l], mrt_d[:, l])) - 1) < 1e-6

    def test_intermediate_coupling_between_extremes(self):
        ch = _random_channel(seed=12)
        mid = rzf_beamformers(ch, 1.0, 0.05)
        mrt = mrt_beamformers(ch, 1.0)

        def worst_cross(bf):
            coupling = ch.gains.conj().T @ bf.vectors
            hn = np.linalg.norm(ch.gains, axis=0)[:, None]
            fn = np.linalg.norm(bf.vectors, axis=0)[None, :]
            c = np.abs(coupling) / (hn * fn)
            np.fill_diagonal(c, 0)
            return c.max()

        assert 0 < worst_cross(mid) < worst_cross(mrt)

    def test_power_budget(self):
        ch = _random_channel(seed=9)
        assert abs(rzf_beamformers(ch, 3.0, 0.1).total_power() - 3.0) < 1e-9


class TestSubcarrierMrt:
    def test_single_path_flat(self):
        ch = _random_channel(m=16, l=1, seed=7)
        bf = ofdm_mrt_beamformers(ch, 256)
        expected = np.linalg.norm(ch.gains[:, 0])
        assert np.allclose(bf.equivalent_gain, expected, rtol=1e-12)

    def test_two_path_comb_period(self):
        # equal-gain two-path channel ripples with period 1/delta_tau
        m = 4
        a = np.ones(m, dtype=complex)
        dtau = 12.5 * T
        gains = np.stack([a, a], axis=1)
        ch = PathChannel(gains, np.array([0.0, dtau]), T)
        n_sc = 1024
        bf = ofdm_mrt_beamformers(ch, n_sc)
        f = np.fft.fftfreq(n_sc, d=T)
        # oracle: || a (1 + e^{j 2 pi f dtau}) || = 2 sqrt(m) |cos(pi f dtau)|
        expected = 2 * np.sqrt(m) * np.abs(np.cos(np.pi * f * dtau))
        assert np.max(np.abs(bf.equivalent_gain - expected)) < 1e-9

    def test_unit_norms(self):
        ch = _random_channel(m=16, l=3, seed=11)
        bf = ofdm_mrt_beamformers(ch, 128)
        assert np.max(np.abs(np.linalg.norm(bf.vectors, axis=0) - 1)) < 1e-12

    def test_matches_direct_formula(self):
        ch = _random_channel(m=8, l=2, seed=13)
        c = frequency_domain_channel(ch, 64)
        bf = ofdm_mrt_beamformers(ch, 64)
        assert np.allclose(np.linalg.norm(c, axis=0), bf.equivalent_gain)
