"""Adaptive delayed-feedback sliding-mode controller and linear baseline.

The controller steers a control-affine chain plant onto a periodic trajectory
by feeding back the delay error e = x(t) - x(t-T).  It decomposes into

    u_eq : cancels the known drift difference, the gain-weighted delayed
           control and the sliding-surface error term,
    u_ad : cancels the regressor mismatch using the online parameter estimate
           theta_hat plus a robustness term 2*k_hat*sigma(S) fed by the
           estimated disturbance bound,
    u_s  : the switching (reaching) term -(M + mu)*sigma(S)/g.

theta_hat and k_hat evolve under fractional-order adaptation laws driven by
the sliding surface S = e_n + sum eta_i I^alpha e_i; the surface integral is
accumulated from the controller activation instant.  sigma is the sign
function or one of its boundary-layer smoothings; sgn(0) = 0 so that a
perfectly periodic history yields u = 0 identically.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import frac_calc
from .frac_calc import power_kernel, validate_sliding_gains

__all__ = [
    "ControllerConfig",
    "ControlDecomposition",
    "SlidingSurface",
    "switching_function",
    "compute_error",
    "sliding_surface",
    "control_law",
    "adaptation_rates",
    "lyapunov_diagnostic",
    "linear_delayed_feedback",
    "SingularGainError",
]

_SINGULAR_GAIN = 1e-9

SWITCHING_MODES = ("sign", "saturation", "sigmoid")


class SingularGainError(ZeroDivisionError):
    """Control gain g(t, x) too close to zero to divide by."""


@dataclass
class ControllerConfig:
    """Gains and switches of the adaptive delayed-feedback controller.

    T is the orbit period, eta the sliding gains (must be admissible for the
    plant's fractional order), gamma/gamma_k the adaptation gains, mu the
    reaching margin, M the robustness constant, delta the boundary-layer
    width used by the saturation smoothing, and t_on the activation time.
    reduced_switching drops M from u_s (valid when the true parameters are
    time-invariant).
    """

    T: float
    eta: tuple = (1.0, 2.0)
    gamma: tuple = (5.0, 5.0, 5.0, 5.0)
    gamma_k: float = 1.0
    mu: float = 0.1
    M: float = 10.0
    switching: str = "saturation"
    delta: float = 0.05
    t_on: float = 0.0
    reduced_switching: bool = False

    def __post_init__(self):
        self.eta = tuple(float(v) for v in np.atleast_1d(self.eta))
        self.gamma = tuple(float(v) for v in np.atleast_1d(self.gamma))
        if self.T <= 0:
            raise ValueError("orbit period must be positive")
        if any(v <= 0 for v in self.eta):
            raise ValueError("sliding gains must be strictly positive")
        if any(v <= 0 for v in self.gamma) or self.gamma_k <= 0:
            raise ValueError("adaptation gains must be strictly positive")
        if self.mu <= 0 or self.M <= 0:
            raise ValueError("mu and M must be strictly positive")
        if self.switching not in SWITCHING_MODES:
            raise ValueError(f"switching must be one of {SWITCHING_MODES}")
        if self.switching == "saturation" and not self.delta > 0:
            raise ValueError("saturation smoothing needs delta > 0")

    def validate_gains(self, alpha):
        """Check eta admissibility for the plant order; raises if inadmissible."""
        check = validate_sliding_gains(alpha, self.eta)
        if not check.admissible:
            raise ValueError(
                f"sliding gains {self.eta} inadmissible at alpha={alpha}: "
                f"root arguments {np.round(check.root_args, 4)} do not all exceed "
                f"{alpha * math.pi / 2:.4f}")
        return check


@dataclass
class ControlDecomposition:
    u_eq: float
    u_ad: float
    u_s: float
    u: float
    S: float
    e: np.ndarray
    V: float = math.nan

    @classmethod
    def inactive(cls, n):
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, np.zeros(n))


def switching_function(mode, delta=0.05):
    """sigma(S): sign, saturation (linear inside |S| < delta), or the
    zero-centered sigmoid 2/(1+exp(-S)) - 1."""
    if mode == "sign":
        return lambda s: float(np.sign(s))
    if mode == "saturation":
        if not delta > 0:
            raise ValueError("saturation smoothing needs delta > 0")
        return lambda s: float(np.clip(s / delta, -1.0, 1.0))
    if mode == "sigmoid":
        return lambda s: 2.0 / (1.0 + math.exp(-s)) - 1.0
    raise ValueError(f"switching must be one of {SWITCHING_MODES}")


def compute_error(x, x_delayed):
    """Delay error e = x - x(t-T), componentwise."""
    x = np.asarray(x, dtype=float)
    x_delayed = np.asarray(x_delayed, dtype=float)
    if x.shape != x_delayed.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_delayed.shape}")
    return x - x_delayed


class SlidingSurface:
    """Incremental S = e_n + sum_i eta_i * I^alpha e_i on the solver grid.

    Error samples are pushed once per accepted step; value(p, e) evaluates the
    surface at grid offset p from the surface birth using the stored samples
    1..p-1 plus the current error (the product-rectangle rule weights the
    current sample by h^alpha/Gamma(alpha+1)).  Samples strictly before the
    surface birth never enter the integral.
    """

    def __init__(self, alpha, eta, h, capacity=1024):
        if not 0 < alpha <= 1:
            raise ValueError(f"fractional order must lie in (0, 1], got {alpha}")
        self.alpha = alpha
        self.eta = np.asarray(eta, dtype=float)
        self.h = h
        self.scale = h ** alpha / math.gamma(alpha + 1.0)
        self._n = self.eta.size
        self._samples = np.empty((max(capacity, 2), self._n))
        self._count = 0
        self._kernel_rev = None
        self._kernel_len = 0

    def __len__(self):
        return self._count

    def _ensure_kernel(self, p):
        if p <= self._kernel_len:
            return
        new_len = max(2 * self._kernel_len, p, 256)
        kernel = power_kernel(self.alpha, new_len)
        self._kernel_rev = np.ascontiguousarray(kernel[::-1])
        self._kernel_len = new_len

    def push(self, e):
        if self._count == self._samples.shape[0]:
            self._samples = np.resize(self._samples, (2 * self._count, self._n))
        self._samples[self._count] = e
        self._count += 1

    def value(self, p, e_current):
        """Surface value at grid offset p with the current error e_current."""
        e_current = np.asarray(e_current, dtype=float)
        if p < 0:
            raise ValueError("grid offset must be >= 0")
        if p > self._count:
            raise ValueError(
                f"surface history incomplete: offset {p} but only "
                f"{self._count} samples stored")
        if p == 0:
            return float(e_current[-1])
        integral = e_current.astype(float, copy=True)  # current sample, weight c_0 = 1
        if p > 1:
            self._ensure_kernel(p)
            L = self._kernel_len
            w = self._kernel_rev[L - p : L - 1]
            integral += w @ self._samples[1:p]
        return float(e_current[-1] + self.scale * (self.eta @ integral))


def sliding_surface(alpha, eta, e_history):
    """Batch surface value at the final sample of per-component error signals.

    e_history is a sequence of n SampledSignal objects on one common grid; the
    last component is the direct term, every component feeds its fractional
    integral weighted by eta.  Reference implementation for tests; the solver
    loop uses SlidingSurface.
    """
    eta = np.asarray(eta, dtype=float)
    if len(e_history) != eta.size:
        raise ValueError("one error component per sliding gain required")
    base = e_history[0]
    for sig in e_history[1:]:
        if sig.values.size != base.values.size or sig.h != base.h or sig.t0 != base.t0:
            raise ValueError("misaligned error histories")
    s = float(e_history[-1].values[-1])
    for gain, sig in zip(eta, e_history):
        s += gain * float(frac_calc.fractional_integral(alpha, sig).values[-1])
    return s


def control_law(t, x, delayed, theta_hat, k_hat, S, system, config):
    """Evaluate the three-term control at time t; zero before activation.

    delayed is the history lookup (x_tilde, u_tilde, theta_hat_delayed) at
    t - T.  Raises SingularGainError if |g(t, x)| < 1e-9.
    """
    x = np.asarray(x, dtype=float)
    n = system.n
    if t < config.t_on:
        return ControlDecomposition.inactive(n)

    x_tilde, u_tilde, theta_hat_delayed = delayed
    e = compute_error(x, x_tilde)
    g_now = system.g(t, x)
    if abs(g_now) < _SINGULAR_GAIN:
        raise SingularGainError(f"|g(t,x)|={abs(g_now):.3g} at t={t:.6g}")
    t_del = t - config.T
    g_del = system.g(t_del, x_tilde)
    f_now = system.f(t, x)
    f_del = system.f(t_del, x_tilde)
    F_now = system.F(t, x)
    F_del = system.F(t_del, x_tilde)

    sigma = switching_function(config.switching, config.delta)(S)
    eta = np.asarray(config.eta, dtype=float)

    u_eq = -(eta @ e + f_now - f_del - g_del * u_tilde) / g_now
    u_ad = -(F_now @ np.asarray(theta_hat) - F_del @ np.asarray(theta_hat_delayed)
             + 2.0 * k_hat * sigma) / g_now
    if config.reduced_switching:
        u_s = -config.mu * sigma / g_now
    else:
        u_s = -(config.M + config.mu) * sigma / g_now
    return ControlDecomposition(u_eq=u_eq, u_ad=u_ad, u_s=u_s,
                                u=u_eq + u_ad + u_s, S=S, e=e)


def adaptation_rates(S, F_now, F_delayed, config):
    """Caputo rates of the estimates: D^a theta_hat_i = gamma_i S (F_i - F_i~),
    D^a k_hat = 2 gamma_k |S|.  The solver integrates these as part of the
    augmented state."""
    F_now = np.asarray(F_now, dtype=float)
    F_delayed = np.asarray(F_delayed, dtype=float)
    gamma = np.asarray(config.gamma, dtype=float)
    if F_now.shape != F_delayed.shape or F_now.size != gamma.size:
        raise ValueError("regressor/gain dimension mismatch")
    theta_rates = gamma * S * (F_now - F_delayed)
    k_rate = 2.0 * config.gamma_k * abs(S)
    return theta_rates, k_rate


def lyapunov_diagnostic(S, theta_true, theta_hat, k_true, k_hat, gamma, gamma_k):
    """V = S^2/2 + sum (theta_i - theta_hat_i)^2/(2 gamma_i) + (k - k_hat)^2/(2 gamma_k).

    Simulation-only diagnostic; needs the hidden true parameters.
    """
    theta_err = np.asarray(theta_true, dtype=float) - np.asarray(theta_hat, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return float(0.5 * S ** 2 + np.sum(theta_err ** 2 / (2.0 * gamma))
                 + (k_true - k_hat) ** 2 / (2.0 * gamma_k))


def linear_delayed_feedback(t, x, x_delayed, gains, t_on):
    """Linear delayed feedback u = -sum K_i (x_i - x_i(t-T)) once active.

    The baseline competitor: vanishes identically on any T-periodic orbit.
    """
    if t < t_on:
        return 0.0
    e = compute_error(x, x_delayed)
    gains = np.asarray(gains, dtype=float)
    if gains.size != e.size:
        raise ValueError("one gain per state channel required")
    return float(-(gains @ e))
