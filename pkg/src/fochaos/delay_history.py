"""Time-indexed storage of past states, controls, and parameter estimates.

The buffer records one (x, u, theta_hat) tuple per solver grid point and
serves lookups at t - T.  On-grid lookups replay the stored record exactly;
off-grid lookups linearly interpolate x and theta_hat and hold the control of
the left grid point (zero-order-hold actuation).  Lookups before the first
record resolve through the pre-history policy and never fail.
"""

from typing import NamedTuple

import numpy as np

__all__ = ["HistoryBuffer", "DelayedSample", "HistoryLookupError"]

_GRID_SNAP = 1e-6  # fraction of h within which a lookup counts as on-grid


class HistoryLookupError(LookupError):
    """Requested a time beyond the recorded range (causality violation)."""


class DelayedSample(NamedTuple):
    x: np.ndarray
    u: float
    theta_hat: np.ndarray


class HistoryBuffer:
    """Append-only uniform-grid history with delayed lookup.

    pre_history selects what a lookup before the first record returns:
    'hold_initial' holds the initial record (its control included);
    'zero_control' holds the initial x and theta_hat but forces u = 0.
    """

    def __init__(self, t0, h, state_dim, param_dim, pre_history="hold_initial",
                 capacity=1024):
        if not h > 0:
            raise ValueError("step must be positive")
        if pre_history not in ("hold_initial", "zero_control"):
            raise ValueError(f"unknown pre-history policy {pre_history!r}")
        self.t0 = float(t0)
        self.h = float(h)
        self.pre_history = pre_history
        self._x = np.empty((capacity, state_dim))
        self._u = np.empty(capacity)
        self._theta = np.empty((capacity, param_dim))
        self._count = 0

    def __len__(self):
        return self._count

    @property
    def last_time(self):
        if self._count == 0:
            return None
        return self.t0 + (self._count - 1) * self.h

    def _grow(self):
        cap = self._x.shape[0] * 2
        self._x = np.resize(self._x, (cap, self._x.shape[1]))
        self._u = np.resize(self._u, cap)
        self._theta = np.resize(self._theta, (cap, self._theta.shape[1]))

    def append(self, t, x, u, theta_hat):
        """Record the sample at t; t must be the next grid time t0 + count*h."""
        expected = self.t0 + self._count * self.h
        if abs(t - expected) > _GRID_SNAP * self.h:
            raise ValueError(
                f"out-of-order append: got t={t!r}, expected grid time {expected!r}")
        if self._count == self._x.shape[0]:
            self._grow()
        i = self._count
        self._x[i] = x
        self._u[i] = u
        self._theta[i] = theta_hat
        self._count += 1

    def record_at(self, index):
        if not 0 <= index < self._count:
            raise IndexError(index)
        return DelayedSample(self._x[index].copy(), float(self._u[index]),
                             self._theta[index].copy())

    def lookup_delayed(self, t, delay):
        """Return (x, u, theta_hat) at time t - delay."""
        if not delay > 0:
            raise ValueError(f"delay must be positive, got {delay}")
        if self._count == 0:
            raise HistoryLookupError("lookup on an empty buffer")
        tau = t - delay
        pos = (tau - self.t0) / self.h
        j = int(round(pos))
        if abs(pos - j) <= _GRID_SNAP and 0 <= j < self._count:
            return self.record_at(j)
        if tau < self.t0:
            # Pre-history: hold the initial state and estimates. hold_initial
            # replays the initial control too (0 in any closed-loop run, since
            # no control was applied before the run started).
            u0 = float(self._u[0]) if self.pre_history == "hold_initial" else 0.0
            return DelayedSample(self._x[0].copy(), u0, self._theta[0].copy())
        left = int(np.floor(pos))
        if left + 1 >= self._count:
            raise HistoryLookupError(
                f"lookup at t-T={tau:.6g} is beyond the recorded history "
                f"(last record at {self.last_time:.6g})")
        frac = pos - left
        x = (1.0 - frac) * self._x[left] + frac * self._x[left + 1]
        theta = (1.0 - frac) * self._theta[left] + frac * self._theta[left + 1]
        return DelayedSample(x, float(self._u[left]), theta)
