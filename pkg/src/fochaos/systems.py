"""Benchmark plants in control-affine regressor form.

Every plant is a chain of fractional integrators whose last channel carries
the dynamics:

    D^alpha x_i = x_{i+1},                      i < n
    D^alpha x_n = f(t,x) + F(t,x).theta + d(t) + g(t,x) u

f is the known drift, F the known regressor, theta the true (hidden) parameter
vector, d a bounded disturbance with (hidden) bound k_true, and g the control
gain.  The Duffing and Gyro oscillators below both exhibit chaos uncontrolled
and possess an unstable periodic orbit of known period T.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "SystemDefinition",
    "duffing_system",
    "gyro_system",
    "make_system",
    "eval_plant_rate",
    "gyro_regressor_first",
]

TWO_PI = 2.0 * math.pi


@dataclass
class SystemDefinition:
    """A control-affine chain plant; see the module docstring for the form."""

    name: str
    n: int                      # state dimension
    m: int                      # parameter dimension
    alpha: float                # fractional order of every channel
    T: float                    # period of the targeted unstable orbit
    f: Callable                 # (t, x) -> float, known drift on the last channel
    F: Callable                 # (t, x) -> ndarray of m regressor components
    g: Callable                 # (t, x) -> float, control gain (nonzero)
    d: Callable                 # t -> float, external disturbance
    theta_true: np.ndarray      # hidden ground truth, simulation only
    k_true: float               # hidden disturbance bound, |d| <= k_true

    def __post_init__(self):
        self.theta_true = np.asarray(self.theta_true, dtype=float)
        if self.theta_true.size != self.m:
            raise ValueError("theta_true length must equal m")
        if self.n < 1:
            raise ValueError("state dimension must be >= 1")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"order must lie in (0, 1], got {self.alpha}")


def eval_plant_rate(system, t, x, u):
    """Full state rate (x_2, ..., x_n, f + F.theta + d + g*u)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite state")
    rate = np.empty(system.n)
    rate[:-1] = x[1:]
    rate[-1] = (system.f(t, x) + system.F(t, x) @ system.theta_true
                + system.d(t) + system.g(t, x) * u)
    return rate


# -- Duffing oscillator -------------------------------------------------------

def duffing_system(alpha=0.98, T=TWO_PI):
    """Fractional Duffing oscillator with all stiffness/damping/forcing terms
    treated as unknown: theta = (-1, 1, 0.15, 0.3) against the regressor
    (-x1, -x1^3, -x2, cos t).  Chaotic uncontrolled; orbit period 2*pi.

    alpha defaults to 0.98; 0.96 is the documented alternate.
    """

    def f(t, x):
        return 0.0

    def F(t, x):
        return np.array([-x[0], -x[0] ** 3, -x[1], math.cos(t)])

    def g(t, x):
        return 1.0 + x[0] ** 2

    def d(t):
        return 0.2 * math.cos(2.0 * t)

    return SystemDefinition(
        name="duffing", n=2, m=4, alpha=alpha, T=T,
        f=f, F=F, g=g, d=d,
        theta_true=np.array([-1.0, 1.0, 0.15, 0.3]),
        k_true=0.2,
    )


# -- Gyro ---------------------------------------------------------------------

_GYRO_GUARD = 1e-4  # |sin x1| below this switches the first regressor to its series


def gyro_regressor_first(x1):
    """The gyro regressor component (1 - cos x1)^2 / sin^3 x1 (sign included
    by the caller).  Near multiples of pi the direct quotient loses all
    precision, so for |sin x1| < 1e-4 the odd Taylor series about the nearest
    even multiple of pi is used:

        r/4 + r^3/12 + 17 r^5/960,  r = x1 mod 2*pi reduced to [-pi, pi]

    Away from the guard the quotient is evaluated with 1 - cos x1 = 2 sin^2(x1/2),
    which is free of cancellation.
    """
    s = math.sin(x1)
    if abs(s) >= _GYRO_GUARD:
        half = math.sin(0.5 * x1)
        return 4.0 * half ** 4 / s ** 3
    r = math.remainder(x1, TWO_PI)
    return r / 4.0 + r ** 3 / 12.0 + 17.0 * r ** 5 / 960.0


def gyro_system(alpha=0.99, T=2.0 * TWO_PI, forcing_freq=2.0,
                forcing_amplitude=35.5):
    """Fractional gyro with parametric excitation: the squared pendulum-like
    stiffness psi1^2, damping psi2/psi3 and gravity beta are unknown,
    theta = (100, 0.5, 0.05, 1); the parametric forcing
    35.5 sin(2 t) sin(x1) is the known drift.  Orbit period 4*pi.

    The defaults are the closest configuration to the published parameter set
    that actually behaves chaotically: fast forcing (25 rad/s) averages out
    and the plant settles to a small periodic motion at any order, and at
    forcing_freq = 2 the extra dissipation of orders <= 0.985 still suppresses
    chaos (verified by direct simulation: the uncontrolled periodicity defect
    collapses below 1e-3).  alpha = 0.99 is chaotic; 0.98 and 0.97 remain
    selectable.  forcing_freq must keep forcing_freq * T a multiple of 2*pi,
    otherwise the dynamics are not T-periodic and the delayed-feedback
    objective is ill-posed.
    """

    def f(t, x):
        return forcing_amplitude * math.sin(forcing_freq * t) * math.sin(x[0])

    def F(t, x):
        return np.array([
            -gyro_regressor_first(x[0]),
            -x[1],
            -x[1] ** 3,
            math.sin(x[0]),
        ])

    def g(t, x):
        return 1.0 + x[0] ** 2

    def d(t):
        return 0.1 * math.sin(t)

    _forcing_periodicity_check(forcing_freq, T)
    return SystemDefinition(
        name="gyro", n=2, m=4, alpha=alpha, T=T,
        f=f, F=F, g=g, d=d,
        theta_true=np.array([100.0, 0.5, 0.05, 1.0]),
        k_true=0.1,
    )


def _forcing_periodicity_check(freq, T):
    cycles = freq * T / TWO_PI
    if abs(cycles - round(cycles)) > 1e-9:
        raise ValueError(
            f"forcing frequency {freq} is not T-periodic for T={T}: "
            f"{cycles:.4f} cycles per period")


_REGISTRY = {"duffing": duffing_system, "gyro": gyro_system}


def make_system(name, alpha=None, T=None):
    """Build a registered plant by name, optionally overriding alpha or T."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; known: {sorted(_REGISTRY)}") from None
    kwargs = {}
    if alpha is not None:
        kwargs["alpha"] = alpha
    if T is not None:
        kwargs["T"] = T
    return factory(**kwargs)
