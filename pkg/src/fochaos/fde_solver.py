"""Fixed-step Adams-Bashforth-Moulton predictor-corrector for Caputo systems.

Solves D^alpha z = rhs(t, z, history) with z(0) = z0 on a uniform grid using the
standard fractional Adams scheme: one product-rectangle predictor, one
product-trapezoid corrector pass per step (Predict-Evaluate-Correct-Evaluate).
The right-hand side may read a delay-history object; the solver threads it
through untouched and guarantees it only ever evaluates the rhs at grid times,
with the delayed reads necessarily in the already-recorded past.

For 0 < alpha <= 1 the initial-condition term is the single Taylor term z0.
All accepted rhs evaluations are retained for the memory sums (full memory by
default; an optional truncation window is available but off by default).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .frac_calc import power_kernel

__all__ = [
    "FDEProblem",
    "SolverOutput",
    "SolverDivergenceError",
    "pece_weights",
    "solve",
    "solve_reference_classical",
]


class SolverDivergenceError(RuntimeError):
    """State left the finite range; carries the offending step index."""

    def __init__(self, step_index, t):
        self.step_index = step_index
        self.t = t
        super().__init__(f"non-finite state at step {step_index} (t={t:.6g})")


@dataclass
class FDEProblem:
    """A Caputo-type initial value problem on [0, t_end] with uniform step h.

    rhs(t, z, history) -> rates must be defined for every finite state; history
    is passed through verbatim (may be None).  on_step, when given, is invoked
    as on_step(index, t, z) after each accepted step, before that step's state
    is used for further rhs evaluations; closed-loop assemblies use it to
    append the step to their delay history.
    """

    alpha: float
    dimension: int
    rhs: Callable
    z0: np.ndarray
    t_end: float
    h: float
    history: object = None
    on_step: Optional[Callable] = None
    memory_window: Optional[int] = None  # steps of memory to keep; None = full

    def __post_init__(self):
        self.z0 = np.atleast_1d(np.asarray(self.z0, dtype=float))
        if self.dimension < 1 or self.z0.size != self.dimension:
            raise ValueError("dimension must be >= 1 and match z0")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"fractional order must lie in (0, 1], got {self.alpha}")
        if not (self.h > 0 and self.t_end > 0):
            raise ValueError("need h > 0 and t_end > 0")


@dataclass
class SolverOutput:
    times: np.ndarray
    states: np.ndarray   # shape (steps+1, dimension)
    rhs_evals: int


def pece_weights(alpha, step_index, h):
    """Predictor and corrector weights for the step from t_k to t_{k+1}.

    Returns (b, a): b[j] multiplies the stored evaluation f_j in the predictor
    sum (to be divided by Gamma(alpha)); a[j] multiplies f_j in the corrector
    for j <= k, and a[k+1] is the weight of the fresh evaluation at the
    predicted point.  The h^alpha scale factors are included:

        b_j = h^alpha/alpha * [(k+1-j)^alpha - (k-j)^alpha]
        a_0 = h^alpha/Gamma(alpha+2) * [k^(alpha+1) - (k-alpha)(k+1)^alpha]
        a_j = h^alpha/Gamma(alpha+2) * [(k-j+2)^(alpha+1) + (k-j)^(alpha+1)
                                        - 2(k-j+1)^(alpha+1)],  1 <= j <= k
        a_{k+1} = h^alpha/Gamma(alpha+2)

    At alpha = 1, k = 0 the corrector reduces to the trapezoid rule (h/2, h/2).
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"fractional order must lie in (0, 1], got {alpha}")
    if step_index < 0:
        raise ValueError("step index must be >= 0")
    k = step_index
    j = np.arange(k + 1, dtype=float)
    b = h ** alpha / alpha * ((k + 1 - j) ** alpha - (k - j) ** alpha)
    corr_scale = h ** alpha / math.gamma(alpha + 2.0)
    a = np.empty(k + 2)
    a[0] = k ** (alpha + 1.0) - (k - alpha) * (k + 1) ** alpha
    if k >= 1:
        jj = np.arange(1, k + 1, dtype=float)
        a[1 : k + 1] = ((k - jj + 2) ** (alpha + 1.0) + (k - jj) ** (alpha + 1.0)
                        - 2.0 * (k - jj + 1) ** (alpha + 1.0))
    a[k + 1] = 1.0
    return b, corr_scale * a


def solve(problem):
    """Integrate with the fractional Adams PECE scheme; returns the trajectory.

    The corrector at step k uses the k+1 stored evaluations plus one fresh
    predictor evaluation; the evaluation at the corrected state is stored for
    the following steps, giving exactly 2 rhs evaluations per step.
    """
    alpha = problem.alpha
    h = problem.h
    n_steps = int(round(problem.t_end / h))
    if n_steps < 1:
        raise ValueError("t_end shorter than one step")
    dim = problem.dimension

    # Kernels stored reversed so every per-step weight vector is a contiguous
    # slice: pred_rev[N-1-k+j] = (k-j+1)^a - (k-j)^a pairs with f_j.
    pred = power_kernel(alpha, n_steps)                   # c_m = (m+1)^a - m^a
    m = np.arange(n_steps, dtype=float)
    corr = (m + 2) ** (alpha + 1) + m ** (alpha + 1) - 2 * (m + 1) ** (alpha + 1)
    pred_rev = np.ascontiguousarray(pred[::-1])
    corr_rev = np.ascontiguousarray(corr[::-1])

    pred_scale = h ** alpha / math.gamma(alpha + 1.0)
    corr_scale = h ** alpha / math.gamma(alpha + 2.0)

    states = np.empty((n_steps + 1, dim))
    states[0] = problem.z0
    f_hist = np.empty((n_steps + 1, dim))
    times = h * np.arange(n_steps + 1)
    window = problem.memory_window
    evals = 0

    f_hist[0] = problem.rhs(0.0, states[0].copy(), problem.history)
    evals += 1

    z0 = problem.z0
    for k in range(n_steps):
        t_next = times[k + 1]
        lo = 0 if window is None else max(0, k + 1 - window)
        f_block = f_hist[lo : k + 1]

        w_pred = pred_rev[n_steps - 1 - k + lo : n_steps]
        z_pred = z0 + pred_scale * (w_pred @ f_block)
        if not np.all(np.isfinite(z_pred)):
            raise SolverDivergenceError(k + 1, t_next)

        f_pred = problem.rhs(t_next, z_pred, problem.history)
        evals += 1

        a0 = k ** (alpha + 1.0) - (k - alpha) * (k + 1) ** alpha
        mem = a0 * f_hist[0] if lo == 0 else 0.0
        if k >= 1:
            lo1 = max(lo, 1)
            w_corr = corr_rev[n_steps - 1 - k + lo1 : n_steps]
            mem = mem + w_corr @ f_hist[lo1 : k + 1]
        z_next = z0 + corr_scale * (np.asarray(f_pred) + mem)

        if not np.all(np.isfinite(z_next)):
            raise SolverDivergenceError(k + 1, t_next)
        states[k + 1] = z_next

        if problem.on_step is not None:
            problem.on_step(k + 1, t_next, states[k + 1].copy())
        if k + 1 < n_steps:
            f_hist[k + 1] = problem.rhs(t_next, states[k + 1].copy(), problem.history)
            evals += 1

    return SolverOutput(times=times, states=states, rhs_evals=evals)


def solve_reference_classical(problem):
    """Classical fixed-step RK4 for the alpha = 1 case; independent test oracle.

    History-capable: the rhs receives the problem's history object and the
    half-step stage times interpolate within already-recorded history.
    """
    if problem.alpha != 1.0:
        raise ValueError("classical reference requires alpha = 1 exactly")
    h = problem.h
    n_steps = int(round(problem.t_end / h))
    if n_steps < 1:
        raise ValueError("t_end shorter than one step")
    dim = problem.dimension
    states = np.empty((n_steps + 1, dim))
    states[0] = problem.z0
    times = h * np.arange(n_steps + 1)
    evals = 0
    hist = problem.history
    rhs = problem.rhs

    for k in range(n_steps):
        t = times[k]
        z = states[k]
        k1 = np.asarray(rhs(t, z.copy(), hist))
        k2 = np.asarray(rhs(t + h / 2, z + h / 2 * k1, hist))
        k3 = np.asarray(rhs(t + h / 2, z + h / 2 * k2, hist))
        k4 = np.asarray(rhs(t + h, z + h * k3, hist))
        evals += 4
        z_next = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z_next)):
            raise SolverDivergenceError(k + 1, times[k + 1])
        states[k + 1] = z_next
        if problem.on_step is not None:
            problem.on_step(k + 1, times[k + 1], states[k + 1].copy())

    return SolverOutput(times=times, states=states, rhs_evals=evals)
