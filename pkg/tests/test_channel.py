import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpecheck.channel import (
    NoiseConfig,
    amplitude_damping,
    dephasing,
    depolarizing,
    double_probabilities,
    exact_probabilities,
    matrix_power_apply,
    noise_channel,
    rx,
    sample_counts,
    spam_states,
    stream,
)
from rpecheck.estimator import polar_reparam

KINDS = ("depolarizing", "dephasing", "amplitude_damping")
rates = st.floats(0.0, 1.0)


class TestMatrices:
    def test_rx_zero_identity(self):
        assert np.allclose(rx(0.0), np.eye(4))

    def test_rx_pi_flips(self):
        assert np.allclose(rx(math.pi) @ [1, 0, 0, 1], [1, 0, 0, -1])

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_rx_group(self, a, b):
        assert np.allclose(rx(a) @ rx(b), rx(a + b), atol=1e-12)

    @pytest.mark.parametrize("fn", [depolarizing, dephasing, amplitude_damping])
    def test_zero_rate_identity(self, fn):
        assert np.allclose(fn(0.0), np.eye(4))

    def test_exact_matrices(self):
        b = 0.3
        assert np.allclose(depolarizing(b), np.diag([1, 0.7, 0.7, 0.7]))
        assert np.allclose(dephasing(b), np.diag([1, 0.7, 0.7, 1]))
        ad = np.diag([1, math.sqrt(0.7), math.sqrt(0.7), 0.7])
        ad[3, 0] = 0.3
        assert np.allclose(amplitude_damping(b), ad)

    @given(rates, st.floats(-10, 10))
    def test_depolarizing_commutes(self, b, theta):
        assert np.allclose(depolarizing(b) @ rx(theta), rx(theta) @ depolarizing(b), atol=1e-14)

    def test_full_decay(self):
        assert np.allclose(amplitude_damping(1.0) @ [1, 0, 0, -1], [1, 0, 0, 1])

    @pytest.mark.parametrize("fn", [rx, depolarizing, dephasing, amplitude_damping])
    def test_first_row(self, fn):
        assert np.allclose(fn(0.37)[0], [1, 0, 0, 0])

    def test_exact_flag_matches_double(self):
        for fn in (rx, depolarizing, dephasing, amplitude_damping):
            assert np.allclose(fn(0.4, exact=True).astype(float), fn(0.4))


class TestConfig:
    def test_aliases(self):
        assert NoiseConfig("depol").kind == "depolarizing"
        assert NoiseConfig("ampdamp").kind == "amplitude_damping"

    @pytest.mark.parametrize("kw", [{"kind": "bitflip"}, {"rate": 1.5}, {"spam": -0.1}, {"sine_error": 2}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            NoiseConfig(**kw)

    def test_none_channel_is_identity(self):
        assert np.allclose(noise_channel(NoiseConfig("none")), np.eye(4))


class TestSpam:
    def test_ideal(self):
        init, c, s = spam_states(NoiseConfig())
        assert np.allclose(init, [1, 0, 0, 1])
        assert np.allclose(c, [1, 0, 0, 1])
        assert np.allclose(s, [1, 0, 1, 0])

    def test_one_percent_spam(self):
        init, c, s = spam_states(NoiseConfig(spam=1e-2, sine_error=1e-2))
        assert np.allclose(init, [1, 0, 0, 0.99])
        f = 0.99 * 0.99
        assert np.allclose(s, [1, 0, f * math.cos(0.01), f * math.sin(0.01)])

    def test_full_spam_pins_half(self):
        pc, ps = exact_probabilities(NoiseConfig(spam=1.0), 1.3, 17)
        assert pc == pytest.approx(0.5) and ps == pytest.approx(0.5)


class TestProbabilities:
    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.integers(1, 2**40))
    def test_noiseless_closed_form(self, theta, N):
        pc, ps = exact_probabilities(NoiseConfig(), theta, N)
        with mpmath.workdps(50):
            # the float product N*theta would itself be off by ~N*1e-16
            phase = mpmath.mpf(theta) * N
            want_c, want_s = float((1 + mpmath.cos(phase)) / 2), float((1 + mpmath.sin(phase)) / 2)
        assert pc == pytest.approx(want_c, abs=1e-12)
        assert ps == pytest.approx(want_s, abs=1e-12)

    def test_noiseless_small(self):
        for N in (1, 2, 3, 7, 64):
            pc, ps = exact_probabilities(NoiseConfig(), 1.6, N)
            assert pc == pytest.approx((1 + math.cos(N * 1.6)) / 2, abs=1e-12)
            assert ps == pytest.approx((1 + math.sin(N * 1.6)) / 2, abs=1e-12)

    def test_depolarizing_closed_form(self):
        b = 2.0**-6
        for N in (1, 5, 100, 1000):
            pc, ps = exact_probabilities(NoiseConfig("depol", b), 1.6, N)
            lam = (1 - b) ** N
            assert 2 * pc - 1 == pytest.approx(lam * math.cos(N * 1.6), abs=1e-12)
            assert 2 * ps - 1 == pytest.approx(lam * math.sin(N * 1.6), abs=1e-12)

    def test_amplitude_damping_fixed_point(self):
        pc, ps = exact_probabilities(NoiseConfig("ampdamp", 1.0), 1.6, 2**20)
        assert pc == pytest.approx(1.0) and ps == pytest.approx(0.5)

    def test_sequence_form(self):
        cfg = NoiseConfig("dephase", 0.01, 0.01, 0.01)
        table = exact_probabilities(cfg, 0.7, [1, 2, 4, 8])
        assert table[2] == exact_probabilities(cfg, 0.7, 4)

    def test_rejects_zero_N(self):
        with pytest.raises(ValueError):
            exact_probabilities(NoiseConfig(), 1.0, 0)

    def test_lambda_decreasing_under_depolarizing(self):
        cfg = NoiseConfig("depol", 0.05)
        lams = [polar_reparam(*exact_probabilities(cfg, 1.6, N))[0] for N in range(1, 60)]
        assert all(b < a for a, b in zip(lams, lams[1:]))
        assert lams[9] == pytest.approx(0.95**10, abs=1e-12)

    def test_lambda_phase_under_depolarizing(self):
        lam, phi = polar_reparam(*exact_probabilities(NoiseConfig("depol", 0.01), 1.6, 37))
        assert lam == pytest.approx(0.99**37, abs=1e-12)
        assert phi == pytest.approx(math.fmod(37 * 1.6, 2 * math.pi), abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(KINDS), rates, st.floats(0, 0.2), st.floats(0, 6.3), st.integers(1, 2**45))
    def test_trace_and_bloch_ball(self, kind, b, spam, theta, N):
        # extended precision, as used by exact_probabilities; the double path
        # drifts by roughly N * 1e-16
        cfg = NoiseConfig(kind, b, spam, spam)
        with mpmath.workdps(40):
            G = noise_channel(cfg, exact=True) @ rx(theta, exact=True)
            state = matrix_power_apply(G, N, spam_states(cfg, exact=True)[0])
            norm = float(mpmath.sqrt(sum(v * v for v in state[1:])))
        assert float(state[0]) == pytest.approx(1.0, abs=1e-12)
        assert norm <= 1 + 1e-12
        pc, ps = exact_probabilities(cfg, theta, N)
        assert 0.0 <= pc <= 1.0 and 0.0 <= ps <= 1.0

    def test_double_agrees_for_moderate_N(self):
        cfg = NoiseConfig("ampdamp", 0.02, 0.01, 0.01)
        for N in (1, 3, 100, 4096):
            assert double_probabilities(cfg, 1.6, N) == pytest.approx(exact_probabilities(cfg, 1.6, N), abs=1e-11)


class TestPower:
    def test_zero_and_one(self):
        G = noise_channel(NoiseConfig("ampdamp", 0.1)) @ rx(0.3)
        s = np.array([1, 0, 0, 1.0])
        assert np.array_equal(matrix_power_apply(G, 0, s), s)
        assert np.allclose(matrix_power_apply(G, 1, s), G @ s)

    def test_matches_sequential(self):
        G = noise_channel(NoiseConfig("dephase", 0.001)) @ rx(1.6)
        s = np.array([1, 0, 0, 1.0])
        seq = s
        for _ in range(1024):
            seq = G @ seq
        assert np.allclose(matrix_power_apply(G, 1024, s), seq, atol=1e-10)

    def test_negative(self):
        with pytest.raises(ValueError):
            matrix_power_apply(np.eye(4), -1, np.ones(4))


class TestSampling:
    def test_edges(self):
        rng = stream(0, 1)
        assert sample_counts(0.0, 50, rng) == 0
        assert sample_counts(1.0, 50, rng) == 50

    def test_deterministic(self):
        a = [sample_counts(0.3, 1000, stream(42, 7, 0, 3, 1)) for _ in range(3)]
        assert len(set(a)) == 1

    def test_streams_independent_of_creation_order(self):
        x = sample_counts(0.5, 10**6, stream(9, 1, 2))
        _ = stream(9, 5, 5)
        assert sample_counts(0.5, 10**6, stream(9, 1, 2)) == x
        assert sample_counts(0.5, 10**6, stream(9, 1, 3)) != x

    def test_mean(self):
        x = sample_counts(0.5, 10**6, stream(3))
        sigma = math.sqrt(10**6 * 0.25)
        assert abs(x - 5 * 10**5) < 5 * sigma

    def test_rejects(self):
        with pytest.raises(ValueError):
            sample_counts(1.2, 10, stream(0))
        with pytest.raises(ValueError):
            sample_counts(0.5, 0, stream(0))
