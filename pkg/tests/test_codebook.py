import itertools
import math

import numpy as np
import pytest

from dichannel import ChannelParams, Codebook, build_grid_codebook, certify_min_distance, convolve, make_cir
from dichannel.codebook import (
    MAX_CERTIFY,
    convolve_codebook,
    grid_axis,
    load_codebook,
    log_m_lower,
    log_m_upper,
    packing_params,
    save_codebook,
)
from dichannel.exceptions import RadiusTooLarge, TooManyCodewords


class TestPacking:
    def test_epsilon_formula(self):
        p = ChannelParams(n=100, a=1.0, b=0.01)
        pk = packing_params(p, 1.0)
        assert pk.epsilon_n == pytest.approx(100**-0.495, rel=1e-12)
        assert pk.r0 == pytest.approx(math.sqrt(100 * 100**-0.495), rel=1e-12)

    def test_h_min_scaling(self):
        p = ChannelParams(n=100)
        assert packing_params(p, 2.0).epsilon_n == pytest.approx(packing_params(p, 1.0).epsilon_n / 4)

    def test_delta(self):
        pk = packing_params(ChannelParams(n=100, a=1.0, c_sigma_max=1.0, b=0.01), 1.0)
        assert pk.delta_n == pytest.approx(4 / 3 * 100**-0.495, rel=1e-12)

    def test_general_exponents(self):
        p = ChannelParams(n=50, kappa=0.1, mu=0.2, a=0.7, b=0.05, c_sigma_max=1.5)
        pk = packing_params(p, 0.8)
        eps = 0.7 / (0.64 * 50 ** ((1 - (0.2 + 0.4 + 0.05)) / 2))
        assert pk.epsilon_n == pytest.approx(eps, rel=1e-12)
        assert pk.r0 == pytest.approx(math.sqrt(p.n_bar * eps), rel=1e-12)
        assert pk.delta_n == pytest.approx(4 * 0.7 * 1.5 / (3 * 50 ** ((1 - (0.2 + 0.2 + 0.05)) / 2)), rel=1e-12)


class TestGrid:
    def test_one_dimensional(self):
        cb = build_grid_codebook(ChannelParams(n=1, p_max=1.0), 0.5, m_cap=100)
        np.testing.assert_allclose(cb.codewords[:, 0], [-1.0, 0.0, 1.0])
        assert cb.M == 3

    def test_two_dimensional_brute_force(self):
        cb = build_grid_codebook(ChannelParams(n=2, p_max=1.0), 0.5, m_cap=100)
        assert cb.M == 9
        brute = min(np.linalg.norm(a - b) for a, b in itertools.combinations(cb.codewords, 2))
        assert brute == pytest.approx(1.0)
        assert certify_min_distance(cb) == pytest.approx(1.0)

    def test_truncation_lexicographic(self):
        cb = build_grid_codebook(ChannelParams(n=2, p_max=1.0), 0.5, m_cap=4)
        np.testing.assert_allclose(cb.codewords, [[-1, -1], [-1, 0], [-1, 1], [0, -1]])

    def test_peak_and_separation(self):
        p = ChannelParams(n=5, p_max=2.0)
        cb = build_grid_codebook(p, 0.7, m_cap=200)
        assert np.abs(cb.codewords).max() <= 2.0 + 1e-12
        assert certify_min_distance(cb) >= 2 * 0.7 - 1e-12

    def test_radius_too_large(self):
        with pytest.raises(RadiusTooLarge):
            grid_axis(1.0, 1.5)

    def test_axis_spacing(self):
        ax = grid_axis(1.0, 0.3)
        assert ax[0] == -1.0
        np.testing.assert_allclose(np.diff(ax), 0.6)


class TestCertify:
    def test_identical_codewords(self):
        assert certify_min_distance(np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])) == 0.0

    def test_single_codeword(self):
        with pytest.raises(ValueError):
            certify_min_distance(np.zeros((1, 3)))

    def test_too_many(self):
        with pytest.raises(TooManyCodewords):
            certify_min_distance(np.zeros((MAX_CERTIFY + 1, 1)))

    def test_random_vs_brute_force(self, rng):
        x = rng.standard_normal((300, 7))
        d = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
        d[np.diag_indices(300)] = np.inf
        assert certify_min_distance(x, block=64) == pytest.approx(d.min(), rel=1e-12)


class TestLogM:
    def test_first_terms_cancel(self):
        p = ChannelParams(n=2, p_max=1.0)
        pk = packing_params(p, 1.0)
        from dichannel.codebook import PackingParams

        at_p = PackingParams(epsilon_n=1.0 / p.n_bar, r0=p.p_max, delta_n=pk.delta_n)
        m = 1
        expected = m * math.log2(m) - m * math.log2(math.e) - p.n
        assert log_m_lower(p, at_p) == pytest.approx(expected)

    def test_lower_formula(self):
        p = ChannelParams(n=100, p_max=2.0)
        pk = packing_params(p, 1.0)
        m = 50
        expected = 100 * math.log2(2.0) - 100 * math.log2(pk.r0) + m * math.log2(m) - m * math.log2(math.e) - 100
        assert log_m_lower(p, pk) == pytest.approx(expected, rel=1e-12)

    def test_upper_memoryless(self):
        p = ChannelParams(n=16, p_max=3.0)
        alpha = 0.1
        nb = 16
        expected = nb * math.log2(3.0 + 2 * alpha) - nb * math.log2(alpha) - nb * math.log2(math.sqrt(math.pi)) \
            + nb / 2 * math.log2(nb)
        assert log_m_upper(p, make_cir([1.0]), alpha) == pytest.approx(expected, rel=1e-12)
        assert log_m_upper(p, None, alpha) == pytest.approx(expected, rel=1e-12)

    def test_upper_uses_k_and_l(self):
        p = ChannelParams(n=16, kappa=0.25, p_max=1.0)
        cir = make_cir([0.5, 2.0])
        nb, alpha = p.n_bar, 0.2
        a_max = 2 * 2.0 * 1.0
        expected = nb * math.log2(a_max + 2 * alpha) - nb * math.log2(alpha) - nb * math.log2(math.sqrt(math.pi)) \
            + nb / 2 * math.log2(nb)
        assert log_m_upper(p, cir, alpha) == pytest.approx(expected, rel=1e-12)


class TestConvolvedCodebook:
    def test_rows_are_convolutions(self, rng):
        cb = Codebook(codewords=rng.uniform(-1, 1, (5, 8)), p_max=1.0, r0=0.1)
        cir = make_cir([1.0, -0.3, 0.2])
        conv = convolve_codebook(cb, cir)
        for k in range(5):
            np.testing.assert_allclose(conv.codewords[k], convolve(cb.codewords[k], cir))


class TestPersistence:
    @pytest.mark.parametrize("fmt", ["bin", "csv"])
    def test_round_trip_bitwise(self, tmp_path, fmt, rng):
        cb = Codebook(codewords=rng.uniform(-1, 1, (7, 5)), p_max=1.0, r0=0.123456789)
        path = tmp_path / f"cb.{fmt}"
        save_codebook(cb, path, fmt)
        back = load_codebook(path)
        assert back.codewords.tobytes() == cb.codewords.tobytes()
        assert (back.p_max, back.r0, back.M, back.n) == (1.0, 0.123456789, 7, 5)

    def test_binary_header_layout(self, tmp_path):
        import struct

        cb = Codebook(codewords=np.array([[1.0, -1.0]]), p_max=1.0, r0=0.5)
        save_codebook(cb, tmp_path / "x.bin")
        raw = (tmp_path / "x.bin").read_bytes()
        hdr = struct.calcsize("<4sIQQdd")
        assert struct.unpack_from("<4sIQQdd", raw) == (b"DICB", 1, 2, 1, 1.0, 0.5)
        assert np.frombuffer(raw[hdr:], "<f8").tolist() == [1.0, -1.0]
