import numpy as np
import pytest

from turboeq.channel import (
    PROAKIS_C,
    ChannelSpec,
    InvalidRhoError,
    apply_channel,
    autocorrelation,
    rho_for_target_m,
    selection_matrix,
    strong_interferer_set,
    window_columns,
)


def oracle_autocorr(h, k):
    """Direct evaluation of the defining sum q_k = sum_l h_l h_{l+k}."""
    L = len(h)
    return sum(h[l] * h[l + k] for l in range(L) if 0 <= l + k < L)


class TestApplyChannel:
    def test_identity_channel(self):
        spec = ChannelSpec(np.array([1.0]), 1e-12)
        r = apply_channel(np.array([1.0, -1.0]), spec, 0)
        np.testing.assert_allclose(r, [1.0, -1.0], atol=1e-5)

    def test_hand_convolution_with_padding(self):
        spec = ChannelSpec(np.array([0.5, 1.0]), 1e-20)
        r = apply_channel(np.array([1.0, 1.0]), spec, 0)
        np.testing.assert_allclose(r, [1.0, 1.5, 0.5], atol=1e-9)

    def test_impulse_gives_reversed_taps(self):
        spec = ChannelSpec(PROAKIS_C, 1e-20)
        r = apply_channel(np.array([2.0]), spec, 0)
        np.testing.assert_allclose(r, 2.0 * PROAKIS_C[::-1], atol=1e-9)

    def test_seeded_noise_reproducible(self):
        spec = ChannelSpec(PROAKIS_C, 0.3)
        x = np.random.default_rng(0).choice([-1.0, 1.0], 50)
        r1 = apply_channel(x, spec, 42)
        r2 = apply_channel(x, spec, 42)
        r3 = apply_channel(x, spec, 43)
        np.testing.assert_array_equal(r1, r2)
        assert not np.array_equal(r1, r3)

    def test_noise_free_equals_double_loop_convolution(self):
        rng = np.random.default_rng(5)
        x = rng.choice([-1.0, 1.0], 20)
        h = rng.normal(size=4)
        spec = ChannelSpec(h, 1e-30)
        r = apply_channel(x, spec, 0)
        imp = h[::-1]
        expect = np.zeros(23)
        for i in range(23):
            for l in range(4):
                j = i - l
                if 0 <= j < 20:
                    expect[i] += imp[l] * x[j]
        np.testing.assert_allclose(r, expect, atol=1e-12)


class TestAutocorrelation:
    def test_proakis_values_from_defining_sum(self):
        q = autocorrelation(PROAKIS_C)
        for k in range(5):
            assert abs(q[4 + k] - oracle_autocorr(PROAKIS_C, k)) < 1e-15
        np.testing.assert_allclose(
            q[4:], [0.972482, 0.8234, 0.514872, 0.20884, 0.051529], atol=1e-12
        )

    def test_single_tap(self):
        q = autocorrelation(np.array([1.0]))
        assert q.shape == (1,)
        assert q[0] == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(8)
        h = rng.normal(size=6)
        q = autocorrelation(h)
        np.testing.assert_allclose(q, q[::-1], atol=1e-15)


class TestStrongInterfererSet:
    def test_proakis_rho_07(self):
        prof = strong_interferer_set(PROAKIS_C, 0.7)
        np.testing.assert_array_equal(prof.k_rho, [-1, 0, 1])
        assert prof.M == 3
        assert prof.k_bar == 1
        assert 1 + 2 * prof.k_bar <= 5

    def test_rho_near_one_gives_m1(self):
        prof = strong_interferer_set(PROAKIS_C, 0.99)
        np.testing.assert_array_equal(prof.k_rho, [0])
        assert prof.M == 1

    def test_rho_04_gives_m5(self):
        prof = strong_interferer_set(PROAKIS_C, 0.4)
        assert prof.M == 5
        assert prof.k_bar == 2
        assert 1 + 2 * prof.k_bar == 5

    def test_rho_01_invalid(self):
        with pytest.raises(InvalidRhoError):
            strong_interferer_set(PROAKIS_C, 0.1)

    def test_ratio_table_against_oracle(self):
        q0 = oracle_autocorr(PROAKIS_C, 0)
        ratios = [oracle_autocorr(PROAKIS_C, k) / q0 for k in range(5)]
        np.testing.assert_allclose(
            ratios, [1.0, 0.846699476, 0.529441162, 0.214749476, 0.052987099], atol=1e-9
        )

    def test_rho_for_target_m(self):
        for m in (1, 3, 5):
            rho = rho_for_target_m(PROAKIS_C, m)
            assert strong_interferer_set(PROAKIS_C, rho).M == m
        with pytest.raises(ValueError):
            rho_for_target_m(PROAKIS_C, 4)  # symmetric lags come in pairs

    def test_contiguous_flag(self):
        assert strong_interferer_set(PROAKIS_C, 0.7).contiguous
        assert strong_interferer_set(PROAKIS_C, 0.99).contiguous


class TestSelectionMatrix:
    def test_index_bookkeeping_l5_m3(self):
        prof = strong_interferer_set(PROAKIS_C, 0.7)
        i = 10
        P = selection_matrix(prof, i, i + 1, 5)
        # rows select positions 3, 4, 5 (1-indexed) of s_{i+1}
        np.testing.assert_array_equal(np.argmax(P, axis=1), [2, 3, 4])
        np.testing.assert_allclose(P @ P.T, np.eye(3))

    def test_m1_selects_last_position(self):
        prof = strong_interferer_set(PROAKIS_C, 0.99)
        P = selection_matrix(prof, 7, 7, 5)
        np.testing.assert_array_equal(P, [[0, 0, 0, 0, 1]])

    def test_window_extraction_on_random_frame(self):
        rng = np.random.default_rng(12)
        x = rng.choice([-1.0, 1.0], 40)
        prof = strong_interferer_set(PROAKIS_C, 0.7)
        for i in range(5, 30):
            lo, hi = prof.window_bounds(i)
            for ip in range(lo, hi + 1):
                s = x[ip - 4 : ip + 1]
                P = selection_matrix(prof, i, ip, 5)
                np.testing.assert_array_equal(P @ s, x[i + prof.k_rho])

    def test_out_of_window_raises(self):
        prof = strong_interferer_set(PROAKIS_C, 0.7)
        with pytest.raises(ValueError):
            selection_matrix(prof, 10, 10, 5)  # below i + k_bar
        with pytest.raises(ValueError):
            selection_matrix(prof, 10, 14, 5)  # above i + L-1-k_bar

    def test_all_window_entries_are_state_components(self):
        # every admissible i' exposes all strong interferers of symbol i
        prof = strong_interferer_set(PROAKIS_C, 0.4)
        lo, hi = prof.window_bounds(20)
        assert lo == hi == 22  # M=5 pins the window uniquely
        cols = window_columns(prof.k_rho, 20, 22, 5)
        assert set(cols) == set(range(5))
