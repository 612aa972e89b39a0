import math

import numpy as np
import pytest

from fochaos import (ControllerConfig, SampledSignal, SlidingSurface,
                     adaptation_rates, compute_error, control_law,
                     duffing_system, linear_delayed_feedback,
                     lyapunov_diagnostic, sliding_surface, switching_function)
from fochaos.controller import SingularGainError
from fochaos.delay_history import DelayedSample
from fochaos.systems import SystemDefinition

TWO_PI = 2.0 * math.pi


def scalar_test_plant(g_value=2.0, F_value=(1.0, -1.0)):
    """Two-channel plant with constant regressor and gain, zero drift."""
    F_const = np.asarray(F_value, dtype=float)
    return SystemDefinition(
        name="bench", n=2, m=F_const.size, alpha=0.9, T=TWO_PI,
        f=lambda t, x: 0.0,
        F=lambda t, x: F_const.copy(),
        g=lambda t, x: g_value,
        d=lambda t: 0.0,
        theta_true=np.zeros(F_const.size), k_true=0.0)


class TestComputeError:
    def test_identity(self):
        assert np.all(compute_error([1.0, 2.0], [1.0, 2.0]) == 0.0)

    def test_subtraction(self):
        np.testing.assert_allclose(compute_error([0.15, 0.1], [0.1, 0.1]),
                                   [0.05, 0.0])

    def test_antisymmetry(self):
        rng = np.random.default_rng(0)
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        np.testing.assert_array_equal(compute_error(a, b), -compute_error(b, a))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            compute_error([1.0], [1.0, 2.0])


class TestSwitchingFunction:
    def test_sign_of_zero_is_zero(self):
        for mode in ("sign", "saturation", "sigmoid"):
            assert switching_function(mode, 0.01)(0.0) == 0.0

    def test_saturation_equals_sign_outside_layer(self):
        sat = switching_function("saturation", 0.05)
        sgn = switching_function("sign")
        for s in (0.05, -0.05, 0.2, -3.0, 1e6):
            assert sat(s) == sgn(s)

    def test_saturation_linear_inside_layer(self):
        sat = switching_function("saturation", 0.1)
        assert sat(0.05) == pytest.approx(0.5)

    def test_sigmoid_is_odd_and_bounded(self):
        sig = switching_function("sigmoid")
        for s in (0.1, 1.0, 10.0):
            assert sig(-s) == pytest.approx(-sig(s))
            assert abs(sig(s)) < 1.0

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            switching_function("bang")


class TestSlidingSurfaceBatch:
    def test_zero_history(self):
        e = [SampledSignal(0.0, 0.01, np.zeros(50)) for _ in range(2)]
        assert sliding_surface(0.9, [1.0, 2.0], e) == 0.0

    def test_zero_gains_pass_through_last_error(self):
        e1 = SampledSignal(0.0, 0.01, np.zeros(50))
        e2 = SampledSignal(0.0, 0.01, np.full(50, 0.7))
        assert sliding_surface(0.9, [0.0, 0.0], [e1, e2]) == pytest.approx(0.7)

    def test_first_order_classical_ramp(self):
        # n=1, eta=1, alpha=1, e == 1 on [0, t]: S = 1 + t
        h, t_end = 0.001, 2.0
        e = [SampledSignal(0.0, h, np.ones(int(t_end / h) + 1))]
        assert sliding_surface(1.0, [1.0], e) == pytest.approx(1.0 + t_end)

    def test_misaligned_histories_rejected(self):
        e1 = SampledSignal(0.0, 0.01, np.zeros(50))
        e2 = SampledSignal(0.0, 0.02, np.zeros(50))
        with pytest.raises(ValueError):
            sliding_surface(0.9, [1.0, 1.0], [e1, e2])


class TestSlidingSurfaceIncremental:
    def test_matches_batch_on_random_history(self):
        rng = np.random.default_rng(42)
        h, alpha, eta = 0.02, 0.85, np.array([1.5, 0.75])
        errors = rng.standard_normal((60, 2))
        surf = SlidingSurface(alpha, eta, h, capacity=8)  # force growth
        for p in range(60):
            incremental = surf.value(p, errors[p])
            signals = [SampledSignal(0.0, h, errors[: p + 1, i]) for i in range(2)]
            batch = sliding_surface(alpha, eta, signals)
            assert incremental == pytest.approx(batch, abs=1e-12)
            surf.push(errors[p])

    def test_value_ahead_of_history_rejected(self):
        surf = SlidingSurface(0.9, [1.0, 1.0], 0.01)
        with pytest.raises(ValueError):
            surf.value(1, np.zeros(2))


class TestControlLaw:
    def config(self, **kw):
        defaults = dict(T=TWO_PI, eta=(1.0, 1.0), gamma=(1.0, 1.0),
                        gamma_k=1.0, mu=0.1, M=5.0, switching="sign",
                        delta=0.01, t_on=0.0)
        defaults.update(kw)
        return ControllerConfig(**defaults)

    def test_hand_computed_decomposition(self):
        plant = scalar_test_plant(g_value=2.0)
        theta_hat = np.array([0.4, 0.4])
        delayed = DelayedSample(x=np.array([0.0, 0.0]), u=0.5,
                                theta_hat=theta_hat.copy())
        dec = control_law(10.0, np.array([0.1, 0.2]), delayed, theta_hat,
                          k_hat=0.2, S=0.5, system=plant, config=self.config())
        assert dec.u_eq == pytest.approx(0.35)
        assert dec.u_ad == pytest.approx(-0.2)
        assert dec.u_s == pytest.approx(-2.55)
        assert dec.u == pytest.approx(-2.4)

    def test_on_orbit_neutrality_exact(self):
        # periodic history: x = x(t-T), matching estimates, u(t-T) = 0, S = 0.
        # Evaluated at t = T so the time-dependent regressor component hits
        # bit-identical cosine values at t and t - T.
        plant = duffing_system()
        x = np.array([0.3, -0.2])
        theta_hat = np.array([-1.5, 1.5, 0.2, 0.5])
        delayed = DelayedSample(x=x.copy(), u=0.0, theta_hat=theta_hat.copy())
        dec = control_law(plant.T, x, delayed, theta_hat, k_hat=0.7, S=0.0,
                          system=plant, config=self.config(T=plant.T))
        assert dec.u == 0.0
        assert dec.u_eq == 0.0 and dec.u_ad == 0.0 and dec.u_s == 0.0

    def test_on_orbit_near_neutrality_generic_time(self):
        # at arbitrary t the delayed cosine argument differs by float 2*pi,
        # leaving only rounding-level residue
        plant = duffing_system()
        x = np.array([0.3, -0.2])
        theta_hat = np.array([-1.5, 1.5, 0.2, 0.5])
        delayed = DelayedSample(x=x.copy(), u=0.0, theta_hat=theta_hat.copy())
        dec = control_law(30.0, x, delayed, theta_hat, k_hat=0.7, S=0.0,
                          system=plant, config=self.config(T=plant.T))
        assert abs(dec.u) < 1e-14

    def test_saturation_equals_sign_outside_layer(self):
        plant = scalar_test_plant()
        x = np.array([0.1, 0.2])
        delayed = DelayedSample(np.zeros(2), 0.5, np.array([0.4, 0.4]))
        args = (x, delayed, np.array([0.4, 0.4]), 0.2, 0.5, plant)
        dec_sign = control_law(10.0, *args, self.config(switching="sign"))
        dec_sat = control_law(10.0, *args,
                              self.config(switching="saturation", delta=0.3))
        assert dec_sat.u == dec_sign.u

    def test_inactive_before_activation(self):
        plant = scalar_test_plant()
        delayed = DelayedSample(np.zeros(2), 0.0, np.zeros(2))
        dec = control_law(1.0, np.array([5.0, 5.0]), delayed, np.zeros(2),
                          0.0, 3.0, plant, self.config(t_on=2.0))
        assert (dec.u, dec.u_eq, dec.u_ad, dec.u_s, dec.S) == (0, 0, 0, 0, 0)

    def test_reduced_switching_drops_robustness_constant(self):
        plant = scalar_test_plant()
        x = np.array([0.1, 0.2])
        delayed = DelayedSample(np.zeros(2), 0.0, np.zeros(2))
        dec = control_law(10.0, x, delayed, np.zeros(2), 0.0, 0.5, plant,
                          self.config(reduced_switching=True))
        assert dec.u_s == pytest.approx(-0.1 * 1.0 / 2.0)

    def test_singular_gain_raises(self):
        plant = scalar_test_plant(g_value=1e-12)
        delayed = DelayedSample(np.zeros(2), 0.0, np.zeros(2))
        with pytest.raises(SingularGainError):
            control_law(10.0, np.zeros(2), delayed, np.zeros(2), 0.0, 0.1,
                        plant, self.config())


class TestAdaptationRates:
    def config(self):
        return ControllerConfig(T=1.0, eta=(1.0,), gamma=(2.0, 2.0, 2.0, 2.0),
                                gamma_k=2.0, t_on=0.0)

    def test_zero_surface_zero_rates(self):
        rng = np.random.default_rng(1)
        F1, F2 = rng.standard_normal(4), rng.standard_normal(4)
        theta_rates, k_rate = adaptation_rates(0.0, F1, F2, self.config())
        assert np.all(theta_rates == 0.0)
        assert k_rate == 0.0

    def test_equal_regressors_only_bound_adapts(self):
        F = np.array([1.0, 2.0, 3.0, 4.0])
        theta_rates, k_rate = adaptation_rates(0.7, F, F.copy(), self.config())
        assert np.all(theta_rates == 0.0)
        assert k_rate == pytest.approx(2.0 * 2.0 * 0.7)

    def test_hand_computed_rates(self):
        F_now = np.array([1.0, 0.0, -1.0, 2.0])
        theta_rates, k_rate = adaptation_rates(0.5, F_now, np.zeros(4),
                                               self.config())
        np.testing.assert_allclose(theta_rates, [1.0, 0.0, -1.0, 2.0])
        assert k_rate == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            adaptation_rates(0.5, np.zeros(3), np.zeros(4), self.config())


class TestLyapunovDiagnostic:
    def test_zero_at_perfect_estimates(self):
        theta = np.array([1.0, 2.0])
        assert lyapunov_diagnostic(0.0, theta, theta, 0.3, 0.3,
                                   [1.0, 1.0], 1.0) == 0.0

    def test_pure_surface_term(self):
        theta = np.array([1.0])
        assert lyapunov_diagnostic(1.0, theta, theta, 0.1, 0.1,
                                   [5.0], 2.0) == pytest.approx(0.5)

    def test_single_parameter_term(self):
        theta = np.array([1.0, 0.0, 0.0, 0.0])
        theta_hat = np.array([0.0, 0.0, 0.0, 0.0])
        v = lyapunov_diagnostic(0.0, theta, theta_hat, 0.5, 0.5,
                                [5.0, 1.0, 1.0, 1.0], 1.0)
        assert v == pytest.approx(0.1)


class TestLinearDelayedFeedback:
    def test_zero_error_zero_control(self):
        x = np.array([0.4, -0.1])
        assert linear_delayed_feedback(10.0, x, x.copy(), [1.0, 2.0], 0.0) == 0.0

    def test_cancelling_channels(self):
        u = linear_delayed_feedback(10.0, [0.1, -0.05], [0.0, 0.0],
                                    [1.0, 2.0], 0.0)
        assert u == pytest.approx(0.0)

    def test_zero_gains(self):
        u = linear_delayed_feedback(10.0, [3.0, 4.0], [0.0, 0.0],
                                    [0.0, 0.0], 0.0)
        assert u == 0.0

    def test_inactive_before_activation(self):
        assert linear_delayed_feedback(1.0, [3.0, 4.0], [0.0, 0.0],
                                       [1.0, 1.0], 5.0) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linear_delayed_feedback(10.0, [1.0, 2.0], [0.0, 0.0], [1.0], 0.0)


class TestSurfaceDerivativeConsistency:
    def test_surface_rate_matches_error_combination(self):
        # S = e_n + sum eta_i I^a e_i implies D^a S - D^a e_n = sum eta_i e_i;
        # the L1 estimates must reproduce it with residual shrinking ~ h
        from fochaos import caputo_derivative_estimate, fractional_integral

        alpha, eta = 0.9, np.array([1.0, 2.0])
        residuals = []
        for steps in (200, 400):
            h = 1.0 / steps
            t = np.arange(0.0, 1.0 + h / 2, h)
            e = np.column_stack([np.sin(2 * t) * np.exp(-t),
                                 np.cos(2 * t) * np.exp(-t)])
            S = e[:, 1].copy()
            for i, gain in enumerate(eta):
                S += gain * fractional_integral(
                    alpha, SampledSignal(0.0, h, e[:, i])).values
            dS = caputo_derivative_estimate(alpha, SampledSignal(0.0, h, S))
            de = caputo_derivative_estimate(alpha, SampledSignal(0.0, h, e[:, 1]))
            k0 = int(0.2 / h)  # the L1 kernel is least accurate near t = 0
            residuals.append(np.max(np.abs(
                dS.values[k0:] - de.values[k0:] - (e @ eta)[k0:])))
        assert residuals[1] < 3e-3
        assert residuals[0] / residuals[1] > 1.5


class TestControllerConfig:
    def test_rejects_nonpositive_gains(self):
        with pytest.raises(ValueError):
            ControllerConfig(T=1.0, eta=(1.0, -2.0))
        with pytest.raises(ValueError):
            ControllerConfig(T=1.0, gamma=(0.0,))
        with pytest.raises(ValueError):
            ControllerConfig(T=-1.0)
        with pytest.raises(ValueError):
            ControllerConfig(T=1.0, switching="bang")

    def test_gain_admissibility_check(self):
        # positive third-order gains violating the Hurwitz-like condition
        config = ControllerConfig(T=1.0, eta=(10.0, 0.1, 1.0))
        with pytest.raises(ValueError):
            config.validate_gains(1.0)
        ControllerConfig(T=1.0, eta=(1.0, 2.0)).validate_gains(0.98)
