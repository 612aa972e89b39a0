"""Discrete fractional-calculus operators and fractional-order stability tests.

The integral operator is the Riemann-Liouville integral of order ``0 < alpha <= 1``
discretized with a product-rectangle rule (right endpoints), which is exact on
constant signals.  The derivative estimate is the classical L1 scheme for the
Caputo derivative.  Stability helpers implement the eigenvalue argument
criterion ``|arg(lambda)| > alpha*pi/2`` for commensurate linear systems and
for the characteristic polynomial of a fractional sliding surface.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SampledSignal",
    "LinearFOSystem",
    "StabilityReport",
    "GainCheck",
    "power_kernel",
    "fractional_integral",
    "caputo_derivative_estimate",
    "check_linear_stability",
    "validate_sliding_gains",
]


@dataclass
class SampledSignal:
    """Uniformly sampled real signal: values[i] is taken at t0 + i*h."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("signal must be a nonempty 1-d sample array")
        if not self.h > 0:
            raise ValueError(f"step must be positive, got h={self.h}")

    @property
    def times(self):
        return self.t0 + self.h * np.arange(self.values.size)


@dataclass
class LinearFOSystem:
    """Commensurate linear system D^alpha x = A x with 0 < alpha < 2."""

    A: np.ndarray
    alpha: float

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError("state matrix must be square")
        if not 0 < self.alpha < 2:
            raise ValueError(f"order must lie in (0, 2), got {self.alpha}")


@dataclass
class StabilityReport:
    stable: bool
    eigenvalues: np.ndarray
    margins: np.ndarray            # |arg(lambda_i)| - alpha*pi/2
    degenerate: np.ndarray = field(default=None)  # True where |lambda| ~ 0 (arg undefined)


@dataclass
class GainCheck:
    admissible: bool
    roots: np.ndarray              # roots of w^n + sum eta_i w^(i-1), w = s^alpha
    margins: np.ndarray            # |arg(w_j)| - alpha*pi/2
    root_args: np.ndarray          # |arg(w_j)|
    implied_s_args: np.ndarray     # |arg(w_j)| / alpha, the angle of s on the principal branch


def _check_order(alpha, upper=1.0):
    if not 0 < alpha <= upper:
        raise ValueError(f"fractional order must lie in (0, {upper}], got {alpha}")


def power_kernel(alpha, count):
    """Forward-difference kernel c_m = (m+1)^alpha - m^alpha for m = 0..count-1.

    These are the product-rectangle quadrature weights (up to the common factor
    h^alpha / Gamma(alpha+1)) and equally the predictor weights of the
    fractional Adams scheme (up to h^alpha / alpha).
    """
    m = np.arange(count + 1, dtype=float)
    return np.diff(m ** alpha)


def fractional_integral(alpha, signal):
    """Riemann-Liouville integral of order alpha on the signal's own grid.

    Product-rectangle rule with right endpoints:

        I[k] = h^alpha/Gamma(alpha+1) * sum_{j=1..k} [(k-j+1)^alpha - (k-j)^alpha] f[j]

    The rule is exact for constants, the first output sample is 0, and at
    alpha = 1 it reduces to the cumulative rectangle rule h * sum f[1..k].
    """
    _check_order(alpha)
    if not isinstance(signal, SampledSignal):
        raise TypeError("expected a SampledSignal")
    f = signal.values
    n = f.size
    scale = signal.h ** alpha / math.gamma(alpha + 1.0)
    out = np.empty(n)
    out[0] = 0.0
    if n == 1:
        return SampledSignal(signal.t0, signal.h, out)
    if alpha == 1.0:
        # Unit kernel: the rule collapses to the cumulative rectangle sum.
        out[1:] = signal.h * np.cumsum(f[1:])
        return SampledSignal(signal.t0, signal.h, out)
    kernel = power_kernel(alpha, n - 1)
    # out[k] = scale * sum_{m=0..k-1} kernel[m] * f[k-m]; one causal convolution.
    from scipy.signal import fftconvolve

    conv = fftconvolve(kernel, f[1:])[: n - 1]
    out[1:] = scale * conv
    return SampledSignal(signal.t0, signal.h, out)


def caputo_derivative_estimate(alpha, signal):
    """L1-scheme estimate of the Caputo derivative of order 0 < alpha < 1.

        D[k] = h^-alpha/Gamma(2-alpha) * sum_{j=0..k-1} w_{k-j-1} (f[j+1]-f[j]),
        w_m = (m+1)^(1-alpha) - m^(1-alpha)

    Exact for constants (0) and for the ramp t.  Intended for post-hoc
    diagnostics, not for use inside a solver loop.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"fractional order must lie in (0, 1), got {alpha}")
    if not isinstance(signal, SampledSignal):
        raise TypeError("expected a SampledSignal")
    f = signal.values
    n = f.size
    if n < 2:
        raise ValueError("need at least two samples to difference")
    kernel = power_kernel(1.0 - alpha, n - 1)
    scale = signal.h ** (-alpha) / math.gamma(2.0 - alpha)
    from scipy.signal import fftconvolve

    conv = fftconvolve(kernel, np.diff(f))[: n - 1]
    out = np.empty(n)
    out[0] = 0.0
    out[1:] = scale * conv
    return SampledSignal(signal.t0, signal.h, out)


def check_linear_stability(system, zero_tol=1e-12):
    """Argument criterion for D^alpha x = A x: stable iff |arg(lambda_i)| > alpha*pi/2.

    Eigenvalues at the origin have no argument; they are flagged degenerate and
    classified unstable (conservative).
    """
    eig = np.linalg.eigvals(system.A)
    threshold = system.alpha * math.pi / 2.0
    degenerate = np.abs(eig) < zero_tol
    args = np.abs(np.angle(eig))
    margins = args - threshold
    stable = bool(np.all(margins > 0) and not degenerate.any())
    return StabilityReport(stable=stable, eigenvalues=eig, margins=margins,
                           degenerate=degenerate)


def validate_sliding_gains(alpha, eta):
    """Admissibility of sliding-surface gains for the surface dynamics.

    The surface constrains the error to D^alpha e_n = -sum eta_i e_i, whose
    characteristic equation in s reads s^(n*alpha) + sum eta_i s^((i-1)*alpha) = 0.
    Substituting w = s^alpha gives the ordinary polynomial

        w^n + eta_n w^(n-1) + ... + eta_2 w + eta_1 = 0,

    and the gains are admissible iff every root satisfies |arg(w)| > alpha*pi/2
    (the commensurate-order criterion).  Both the w-angles and the implied
    s-angles arg(w)/alpha are reported.
    """
    _check_order(alpha)
    eta = np.asarray(eta, dtype=float)
    if eta.ndim != 1 or eta.size == 0:
        raise ValueError("need at least one sliding gain")
    if not np.all(np.isfinite(eta)):
        raise ValueError("sliding gains must be finite")
    coeffs = np.concatenate([[1.0], eta[::-1]])
    roots = np.roots(coeffs)
    threshold = alpha * math.pi / 2.0
    args = np.abs(np.angle(roots))
    margins = args - threshold
    # A root at the origin (eta_1 = 0) has no argument: reject it outright.
    at_origin = np.abs(roots) < 1e-12
    admissible = bool(np.all(margins > 0) and not at_origin.any())
    return GainCheck(admissible=admissible, roots=roots, margins=margins,
                     root_args=args, implied_s_args=args / alpha)
