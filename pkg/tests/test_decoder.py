import numpy as np
import pytest

from oracles import bcjr_brute_force, normalize_rows

from turboeq.decoder import (
    Trellis,
    bcjr_extrinsic,
    bit_to_symbol_log_pmfs,
    decide_bits,
    demod_bridge,
    mod_bridge,
    symbol_to_bit_log_pmfs,
)
from turboeq.exchange import log_pmf
from turboeq.txchain import (
    ConvCodeSpec,
    Termination,
    bpsk_map,
    encode,
    identity_interleaver,
    pam4_gray_map,
    random_interleaver,
)

CODE = ConvCodeSpec((0o23, 0o35), 5)
TRELLIS = Trellis.from_code(CODE)


class TestTrellis:
    def test_state_degree(self):
        # every state has exactly two successors and two predecessors
        assert TRELLIS.n_states == 16
        succ = TRELLIS.next_state.reshape(-1)
        counts = np.bincount(succ, minlength=16)
        np.testing.assert_array_equal(counts, np.full(16, 2))

    def test_transitions_consistent_with_encoder(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, 30)
        coded = encode(bits, CODE)
        s = 0
        u_all = np.concatenate([bits, np.zeros(4, dtype=np.int64)])
        for t, u in enumerate(u_all):
            np.testing.assert_array_equal(
                TRELLIS.out_bits[u, s], coded[2 * t : 2 * t + 2]
            )
            s = TRELLIS.next_state[u, s]
        assert s == 0  # tail termination drains the register


class TestBcjrExtrinsic:
    def test_uniform_inputs_match_enumeration(self):
        for k in (4, 7):
            n_coded = 2 * (k + 4)
            logw = np.full((n_coded, 2), np.log(0.5))
            ext, post = bcjr_extrinsic(logw, TRELLIS)
            ext_bf, post_bf = bcjr_brute_force(logw, CODE, k)
            np.testing.assert_allclose(normalize_rows(ext), normalize_rows(ext_bf), atol=1e-9)
            np.testing.assert_allclose(normalize_rows(post), normalize_rows(post_bf), atol=1e-9)

    def test_point_mass_codeword(self):
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, 24)
        coded = encode(bits, CODE)
        logw = np.where(
            np.arange(2)[None, :] == coded[:, None], 0.0, -np.inf
        )
        ext, post = bcjr_extrinsic(logw, TRELLIS)
        np.testing.assert_array_equal(decide_bits(post, 24), bits)
        # extrinsics agree with the codeword wherever they are decisive
        amax = ext.argmax(axis=1)
        decisive = ext.max(axis=1) - ext.min(axis=1) > 1e-9
        np.testing.assert_array_equal(amax[decisive], coded[decisive])

    def test_random_soft_inputs_match_enumeration(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            k = int(rng.integers(3, 10))
            n_coded = 2 * (k + 4)
            logw = np.log(rng.dirichlet(np.ones(2), size=n_coded))
            ext, post = bcjr_extrinsic(logw, TRELLIS)
            ext_bf, post_bf = bcjr_brute_force(logw, CODE, k)
            np.testing.assert_allclose(normalize_rows(ext), normalize_rows(ext_bf), atol=1e-9)
            np.testing.assert_allclose(normalize_rows(post), normalize_rows(post_bf), atol=1e-9)

    def test_extrinsic_independent_of_own_input(self):
        rng = np.random.default_rng(3)
        k = 8
        n_coded = 2 * (k + 4)
        logw = np.log(rng.dirichlet(np.ones(2), size=n_coded))
        ext, _ = bcjr_extrinsic(logw, TRELLIS)
        for j in (0, 5, n_coded - 1):
            perturbed = logw.copy()
            perturbed[j] = np.log(rng.dirichlet(np.ones(2)))
            ext2, _ = bcjr_extrinsic(perturbed, TRELLIS)
            np.testing.assert_allclose(ext[j], ext2[j], atol=1e-12)

    def test_unterminated_boundary(self):
        code = ConvCodeSpec((0o23, 0o35), 5, Termination.UNTERMINATED)
        trellis = Trellis.from_code(code)
        rng = np.random.default_rng(4)
        k = 6
        logw = np.log(rng.dirichlet(np.ones(2), size=2 * k))
        ext, post = bcjr_extrinsic(logw, trellis)
        ext_bf, post_bf = bcjr_brute_force(logw, code, k)
        np.testing.assert_allclose(normalize_rows(ext), normalize_rows(ext_bf), atol=1e-9)

    def test_long_frame_stays_finite(self):
        rng = np.random.default_rng(5)
        k = 8192 // 2 - 4
        logw = np.log(rng.dirichlet(np.ones(2), size=2 * (k + 4)))
        ext, post = bcjr_extrinsic(logw, TRELLIS)
        assert np.all(np.isfinite(ext))
        assert np.all(np.isfinite(post[:k]))
        # tail inputs are pinned to zero by termination: u=1 is impossible
        # there (log weight -inf), but never NaN
        assert not np.isnan(post).any()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bcjr_extrinsic(np.zeros((7, 2)), TRELLIS)


class TestDecideBits:
    def test_majority(self):
        post = log_pmf(np.array([[0.6, 0.4], [0.3, 0.7]]))
        np.testing.assert_array_equal(decide_bits(post, 2), [0, 1])

    def test_tie_breaks_to_zero(self):
        post = log_pmf(np.array([[0.5, 0.5]]))
        np.testing.assert_array_equal(decide_bits(post, 1), [0])


class TestBridges:
    def test_bpsk_is_relabeling(self):
        symbol_logp = log_pmf(np.array([[0.3, 0.7], [0.9, 0.1]]))
        bits = symbol_to_bit_log_pmfs(symbol_logp, bpsk_map())
        np.testing.assert_allclose(np.exp(bits), [[0.3, 0.7], [0.9, 0.1]], atol=1e-12)

    def test_round_trip_uniform_identity(self):
        pi = identity_interleaver(8)
        logp = np.full((8, 2), np.log(0.5))
        back = mod_bridge(demod_bridge(logp, bpsk_map(), pi), bpsk_map(), pi)
        np.testing.assert_allclose(back, logp, atol=1e-12)

    def test_bpsk_round_trip_with_interleaver(self):
        rng = np.random.default_rng(6)
        pi = random_interleaver(16, seed=3)
        logp = log_pmf(rng.dirichlet(np.ones(2), size=16))
        back = mod_bridge(demod_bridge(logp, bpsk_map(), pi), bpsk_map(), pi)
        np.testing.assert_allclose(back, logp, atol=1e-12)

    def test_pam4_bit_marginals_by_hand(self):
        # Gray labels 00,01,11,10 -> -3,-1,+1,+3
        w = np.array([[0.1, 0.2, 0.3, 0.4]])
        bits = np.exp(symbol_to_bit_log_pmfs(log_pmf(w), pam4_gray_map()))
        # first bit 0 on {-3,-1}, 1 on {+1,+3}
        np.testing.assert_allclose(bits[0], [0.1 + 0.2, 0.3 + 0.4], atol=1e-12)
        # second bit 0 on {-3,+3}, 1 on {-1,+1}
        np.testing.assert_allclose(bits[1], [0.1 + 0.4, 0.2 + 0.3], atol=1e-12)

    def test_pam4_symbol_from_bits(self):
        b = log_pmf(np.array([[0.8, 0.2], [0.3, 0.7]]))
        symb = np.exp(bit_to_symbol_log_pmfs(b, pam4_gray_map()))[0]
        want = np.array([0.8 * 0.3, 0.8 * 0.7, 0.2 * 0.7, 0.2 * 0.3])
        np.testing.assert_allclose(symb, want / want.sum(), atol=1e-12)
