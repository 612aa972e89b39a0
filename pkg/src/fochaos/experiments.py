"""Scenario orchestration: closed-loop assembly, metrics, and file output.

A scenario couples a benchmark plant with one of three controllers (the
adaptive delayed-feedback sliding-mode law, a linear delayed-feedback
baseline, or none), integrates the augmented fractional system with the
Adams predictor-corrector, and records a full Trajectory.  Everything is
deterministic and seed-free: identical configs reproduce byte-identical
output files.
"""

import dataclasses
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .controller import (ControlDecomposition, ControllerConfig, SlidingSurface,
                         adaptation_rates, control_law, compute_error,
                         linear_delayed_feedback, lyapunov_diagnostic)
from .delay_history import HistoryBuffer
from .fde_solver import FDEProblem, solve
from .systems import SystemDefinition, eval_plant_rate, make_system

__all__ = [
    "SimulationConfig",
    "ScenarioConfig",
    "Trajectory",
    "Metrics",
    "ComparisonReport",
    "run_closed_loop",
    "compare_controllers",
    "compute_metrics",
    "periodicity_defect",
    "extract_reference_orbit",
    "emit_outputs",
    "emit_comparison",
]

CONTROLLER_KINDS = ("adaptive_delayed", "linear_delayed", "none")

# Transcribed experiment defaults; keys absent from a config fall back here.
_SYSTEM_DEFAULTS = {
    "duffing": dict(
        alpha=0.98, T=2.0 * math.pi, h=0.005,
        x0=(0.15, 0.1), theta_hat0=(-1.5, 1.5, 0.2, 0.5), k_hat0=0.1,
        eta=(1.0, 2.0), gamma=(5.0, 5.0, 5.0, 5.0), gamma_k=1.0,
        mu=0.1, M=10.0, switching="saturation", delta=0.05,
        t_on=8.0 * math.pi, t_end=8.0 * math.pi + 40.0,
        K_baseline=(2.0, 5.0),
    ),
    "gyro": dict(
        alpha=0.99, T=4.0 * math.pi, h=0.005,
        x0=(0.15, 0.1), theta_hat0=(-1.5, 1.5, 0.2, 0.5), k_hat0=0.1,
        eta=(1.0, 2.0), gamma=(2.0, 2.0, 2.0, 2.0), gamma_k=2.0,
        mu=0.1, M=10.0, switching="saturation", delta=0.05,
        t_on=16.0 * math.pi, t_end=16.0 * math.pi + 60.0,
        K_baseline=(1.0, 0.5),
    ),
}

_CONFIG_KEYS = {
    "system", "alpha", "h", "t_end", "x0", "theta_hat0", "k_hat0", "eta",
    "gamma", "gamma_k", "mu", "M", "switching", "delta", "T", "t_on",
    "controller", "K_baseline", "out_dir", "reduced_switching",
}

CONVERGENCE_THRESHOLD = 0.05  # infinity-norm periodicity defect


@dataclass
class SimulationConfig:
    h: float
    t_end: float
    x0: np.ndarray
    theta_hat0: np.ndarray
    k_hat0: float

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.theta_hat0 = np.asarray(self.theta_hat0, dtype=float)
        if not (self.h > 0 and self.t_end > 0):
            raise ValueError("need h > 0 and t_end > 0")


@dataclass
class ScenarioConfig:
    """One closed-loop run: plant + simulation grid + controller selection.

    system is a registered plant name or a SystemDefinition; alpha and T
    override the plant defaults when given.  Unset numeric fields fall back
    to the per-system defaults table.
    """

    system: object = "duffing"
    controller: str = "adaptive_delayed"
    alpha: float = None
    T: float = None
    h: float = None
    t_end: float = None
    x0: tuple = None
    theta_hat0: tuple = None
    k_hat0: float = None
    eta: tuple = None
    gamma: tuple = None
    gamma_k: float = None
    mu: float = None
    M: float = None
    switching: str = None
    delta: float = None
    t_on: float = None
    K_baseline: tuple = None
    reduced_switching: bool = False
    out_dir: str = None

    def __post_init__(self):
        if self.controller not in CONTROLLER_KINDS:
            raise ValueError(f"controller must be one of {CONTROLLER_KINDS}")

    def _defaults(self):
        name = self.system if isinstance(self.system, str) else self.system.name
        return _SYSTEM_DEFAULTS.get(name, _SYSTEM_DEFAULTS["duffing"])

    def _get(self, key):
        value = getattr(self, key)
        return self._defaults()[key] if value is None else value

    def build_system(self):
        if isinstance(self.system, SystemDefinition):
            sys_def = self.system
            if self.alpha is not None and self.alpha != sys_def.alpha:
                sys_def = dataclasses.replace(sys_def, alpha=self.alpha)
            if self.T is not None and self.T != sys_def.T:
                sys_def = dataclasses.replace(sys_def, T=self.T)
            return sys_def
        return make_system(self.system, alpha=self._get("alpha"), T=self._get("T"))

    def build_simulation(self):
        return SimulationConfig(h=self._get("h"), t_end=self._get("t_end"),
                                x0=self._get("x0"),
                                theta_hat0=self._get("theta_hat0"),
                                k_hat0=self._get("k_hat0"))

    def build_controller(self, system):
        return ControllerConfig(
            T=system.T, eta=self._get("eta"), gamma=self._get("gamma"),
            gamma_k=self._get("gamma_k"), mu=self._get("mu"), M=self._get("M"),
            switching=self._get("switching"), delta=self._get("delta"),
            t_on=self._get("t_on"), reduced_switching=self.reduced_switching)

    def baseline_gains(self):
        return np.asarray(self._get("K_baseline"), dtype=float)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "controller" not in kwargs:
            kwargs["controller"] = "adaptive_delayed"
        for key in ("x0", "theta_hat0", "eta", "gamma", "K_baseline"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path):
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must hold a key-value mapping")
        return cls.from_dict(data)

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, SystemDefinition):
                value = value.name
            if isinstance(value, np.ndarray):
                value = [float(v) for v in value]
            out[f.name] = value
        return out


@dataclass
class Trajectory:
    """Per-step record of a closed-loop run on the uniform solver grid."""

    t: np.ndarray
    x: np.ndarray          # (steps+1, n)
    u: np.ndarray
    u_eq: np.ndarray
    u_ad: np.ndarray
    u_s: np.ndarray
    S: np.ndarray
    e: np.ndarray          # (steps+1, n), x(t) - x(t-T) via history lookup
    theta_hat: np.ndarray  # (steps+1, m)
    k_hat: np.ndarray
    V: np.ndarray
    system_name: str
    controller: str
    T: float
    t_on: float            # effective activation time, snapped to the grid
    h: float

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def m(self):
        return self.theta_hat.shape[1]

    def defect_series(self):
        """Infinity-norm of the delay error at every grid point."""
        return np.max(np.abs(self.e), axis=1)


@dataclass
class Metrics:
    steady_state_error: float
    convergence_time: float  # seconds after activation; inf if never held
    k_hat_final: float
    control_effort: float
    threshold: float = CONVERGENCE_THRESHOLD

    def as_dict(self):
        return {
            "steady_state_error": self.steady_state_error,
            "convergence_time": self.convergence_time,
            "k_hat_final": self.k_hat_final,
            "control_effort": self.control_effort,
            "threshold": self.threshold,
        }


@dataclass
class ComparisonReport:
    kinds: tuple
    metrics: tuple
    trajectories: tuple

    def winner_steady_state(self):
        sse = [m.steady_state_error for m in self.metrics]
        return self.kinds[int(np.argmin(sse))]


def _grid_index(t, h):
    return int(round(t / h))


def run_closed_loop(config):
    """Assemble and integrate the scenario; returns the full Trajectory."""
    system = config.build_system()
    sim = config.build_simulation()
    cc = config.build_controller(system)
    kind = config.controller
    n, m = system.n, system.m
    h = sim.h
    if sim.x0.size != n:
        raise ValueError(f"x0 must have {n} components")
    if sim.theta_hat0.size != m:
        raise ValueError(f"theta_hat0 must have {m} components")

    if kind == "adaptive_delayed":
        cc.validate_gains(system.alpha)
    if cc.t_on < cc.T:
        warnings.warn("activation before one full period: the delayed state "
                      "will partly resolve through pre-history", stacklevel=2)
    if sim.t_end <= cc.t_on + 2.0 * cc.T:
        warnings.warn("t_end leaves less than 2 periods after activation; "
                      "steady-state metrics will be unavailable", stacklevel=2)

    n_steps = _grid_index(sim.t_end, h)
    k_act = max(0, int(math.ceil(cc.t_on / h - 1e-9)))
    cc = dataclasses.replace(cc, t_on=k_act * h)  # snap activation to the grid

    buffer = HistoryBuffer(0.0, h, n, m, capacity=n_steps + 1)
    buffer.append(0.0, sim.x0, 0.0, sim.theta_hat0)
    surface = SlidingSurface(system.alpha, cc.eta, h, capacity=n_steps + 1)

    rec = {name: np.zeros(n_steps + 1) for name in
           ("u", "u_eq", "u_ad", "u_s", "S", "k_hat", "V")}
    rec_e = np.zeros((n_steps + 1, n))
    rec_th = np.zeros((n_steps + 1, m))
    rec_th[0] = sim.theta_hat0
    rec["k_hat"][:] = sim.k_hat0
    rec["V"][0] = lyapunov_diagnostic(0.0, system.theta_true, sim.theta_hat0,
                                      system.k_true, sim.k_hat0, cc.gamma,
                                      cc.gamma_k)
    if k_act == 0:
        surface.push(rec_e[0])

    K = config.baseline_gains() if kind == "linear_delayed" else None

    if kind == "adaptive_delayed":
        z0 = np.concatenate([sim.x0, sim.theta_hat0, [sim.k_hat0]])
        dim = n + m + 1

        def rhs(t, z, hist):
            x = z[:n]
            idx = _grid_index(t, h)
            if idx < k_act:
                u = 0.0
                th_rates = np.zeros(m)
                k_rate = 0.0
            else:
                th = z[n:n + m]
                kh = z[n + m]
                delayed = hist.lookup_delayed(t, cc.T)
                e = compute_error(x, delayed.x)
                S = surface.value(idx - k_act, e)
                dec = control_law(t, x, delayed, th, kh, S, system, cc)
                u = dec.u
                th_rates, k_rate = adaptation_rates(
                    S, system.F(t, x), system.F(t - cc.T, delayed.x), cc)
            plant = eval_plant_rate(system, t, x, u)
            return np.concatenate([plant, th_rates, [k_rate]])

        def on_step(idx, t, z):
            x = z[:n]
            th = z[n:n + m]
            kh = z[n + m]
            delayed = buffer.lookup_delayed(t, cc.T)
            e = compute_error(x, delayed.x)
            if idx >= k_act:
                S = surface.value(idx - k_act, e)
                dec = control_law(t, x, delayed, th, kh, S, system, cc)
                surface.push(e)
            else:
                dec = ControlDecomposition.inactive(n)
            _record(rec, rec_e, rec_th, idx, e, dec, th, kh, system, cc)
            buffer.append(t, x, dec.u, th)

    else:
        z0 = sim.x0.copy()
        dim = n

        def control_of(t, x, hist):
            idx = _grid_index(t, h)
            if idx < k_act or kind == "none":
                return 0.0
            delayed = hist.lookup_delayed(t, cc.T)
            return linear_delayed_feedback(t, x, delayed.x, K, cc.t_on)

        def rhs(t, z, hist):
            return eval_plant_rate(system, t, z, control_of(t, z, hist))

        def on_step(idx, t, z):
            delayed = buffer.lookup_delayed(t, cc.T)
            e = compute_error(z, delayed.x)
            u = control_of(t, z, buffer)
            dec = ControlDecomposition(u_eq=u, u_ad=0.0, u_s=0.0, u=u, S=0.0, e=e)
            _record(rec, rec_e, rec_th, idx, e, dec, sim.theta_hat0, sim.k_hat0,
                    system, cc)
            buffer.append(t, z, u, sim.theta_hat0)

    problem = FDEProblem(alpha=system.alpha, dimension=dim, rhs=rhs, z0=z0,
                         t_end=sim.t_end, h=h, history=buffer, on_step=on_step)
    output = solve(problem)

    return Trajectory(
        t=output.times, x=output.states[:, :n],
        u=rec["u"], u_eq=rec["u_eq"], u_ad=rec["u_ad"], u_s=rec["u_s"],
        S=rec["S"], e=rec_e, theta_hat=rec_th, k_hat=rec["k_hat"], V=rec["V"],
        system_name=system.name, controller=kind, T=cc.T, t_on=cc.t_on, h=h)


def _record(rec, rec_e, rec_th, idx, e, dec, theta_hat, k_hat, system, cc):
    rec_e[idx] = e
    rec["u"][idx] = dec.u
    rec["u_eq"][idx] = dec.u_eq
    rec["u_ad"][idx] = dec.u_ad
    rec["u_s"][idx] = dec.u_s
    rec["S"][idx] = dec.S
    rec_th[idx] = theta_hat
    rec["k_hat"][idx] = k_hat
    rec["V"][idx] = lyapunov_diagnostic(dec.S, system.theta_true, theta_hat,
                                        system.k_true, k_hat, cc.gamma,
                                        cc.gamma_k)


def periodicity_defect(trajectory, t, window=None):
    """max over [t - window, t] of the infinity-norm delay error (window
    defaults to one orbit period)."""
    window = trajectory.T if window is None else window
    lo = max(0, _grid_index(t - window, trajectory.h))
    hi = min(trajectory.t.size - 1, _grid_index(t, trajectory.h))
    if hi < lo:
        raise ValueError("empty defect window")
    return float(np.max(trajectory.defect_series()[lo:hi + 1]))


def compute_metrics(trajectory, threshold=CONVERGENCE_THRESHOLD):
    """Steady-state error, convergence time, final bound estimate, effort."""
    t_end = trajectory.t[-1]
    T = trajectory.T
    h = trajectory.h
    defect = trajectory.defect_series()

    lo = max(0, _grid_index(t_end - 2.0 * T, h))
    steady_state_error = float(np.max(defect[lo:]))

    k_act = _grid_index(trajectory.t_on, h)
    w = _grid_index(T, h)
    convergence_time = math.inf
    below = defect < threshold
    limit = defect.size - w - 1
    i = k_act
    while i <= limit:
        if below[i:i + w + 1].all():
            convergence_time = trajectory.t[i] - trajectory.t_on
            break
        # jump past the first violation inside the window
        i += int(np.argmin(below[i:i + w + 1])) + 1
    return Metrics(
        steady_state_error=steady_state_error,
        convergence_time=convergence_time,
        k_hat_final=float(trajectory.k_hat[-1]),
        control_effort=float(np.trapezoid(np.abs(trajectory.u), dx=h)),
        threshold=threshold)


def _plant_key(config):
    name = config.system.name if isinstance(config.system, SystemDefinition) \
        else config.system
    return (name,) + tuple(
        np.asarray(config._get(key), dtype=float).tobytes()
        for key in ("alpha", "T", "h", "t_end", "x0", "theta_hat0", "k_hat0",
                    "t_on"))


def compare_controllers(config_a, config_b):
    """Run two scenarios that differ only in the controller; report both."""
    if _plant_key(config_a) != _plant_key(config_b):
        raise ValueError("compared scenarios must share the plant and "
                         "simulation settings and differ only in the controller")
    traj_a = run_closed_loop(config_a)
    traj_b = run_closed_loop(config_b)
    return ComparisonReport(
        kinds=(config_a.controller, config_b.controller),
        metrics=(compute_metrics(traj_a), compute_metrics(traj_b)),
        trajectories=(traj_a, traj_b))


def extract_reference_orbit(trajectory, T=None, threshold=CONVERGENCE_THRESHOLD,
                            samples=512):
    """Final full period of a converged run, resampled to a canonical grid.

    Returns (phase, orbit) with phase in [0, T) and orbit of shape
    (samples, n).  Raises if the trajectory has not converged.
    """
    T = trajectory.T if T is None else T
    if trajectory.t[-1] < T:
        raise ValueError("trajectory shorter than one period")
    metrics = compute_metrics(trajectory, threshold=threshold)
    if not metrics.steady_state_error < threshold:
        raise ValueError(
            f"trajectory not converged: steady-state error "
            f"{metrics.steady_state_error:.4g} >= {threshold}")
    t_end = trajectory.t[-1]
    phase = np.linspace(0.0, T, samples, endpoint=False)
    query = t_end - T + phase
    orbit = np.column_stack([
        np.interp(query, trajectory.t, trajectory.x[:, ch])
        for ch in range(trajectory.n)])
    return phase, orbit


# -- file output ---------------------------------------------------------------

def trajectory_header(n, m):
    cols = (["t"] + [f"x{i+1}" for i in range(n)]
            + ["u", "u_eq", "u_ad", "u_s", "S"]
            + [f"e{i+1}" for i in range(n)]
            + [f"theta_hat_{i+1}" for i in range(m)]
            + ["k_hat", "V"])
    return cols


def trajectory_table(trajectory):
    return np.column_stack([
        trajectory.t, trajectory.x, trajectory.u, trajectory.u_eq,
        trajectory.u_ad, trajectory.u_s, trajectory.S, trajectory.e,
        trajectory.theta_hat, trajectory.k_hat, trajectory.V])


def emit_outputs(trajectory, metrics, out_dir, plots=False):
    """Write trajectory.csv and metrics.txt (and figures with plots=True).

    Returns the list of written paths.  Plot emission is cosmetic; nothing
    downstream depends on the figures.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    table = trajectory_table(trajectory)
    csv_path = out / "trajectory.csv"
    np.savetxt(csv_path, table, delimiter=",", fmt="%.12g",
               header=",".join(trajectory_header(trajectory.n, trajectory.m)),
               comments="")
    written.append(csv_path)

    metrics_path = out / "metrics.txt"
    lines = [f"system={trajectory.system_name}",
             f"controller={trajectory.controller}",
             f"T={trajectory.T:.12g}",
             f"t_on={trajectory.t_on:.12g}"]
    lines += [f"{key}={value:.12g}" for key, value in metrics.as_dict().items()]
    metrics_path.write_text("\n".join(lines) + "\n")
    written.append(metrics_path)

    if plots:
        from . import plotting
        written += plotting.render_run_figures(trajectory, out)
    return written


def emit_comparison(report, out_dir, plots=False):
    """Write per-controller outputs plus a side-by-side comparison table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for kind, metrics, traj in zip(report.kinds, report.metrics,
                                   report.trajectories):
        written += emit_outputs(traj, metrics, out / kind, plots=plots)

    lines = ["metric," + ",".join(report.kinds)]
    keys = ("steady_state_error", "convergence_time", "k_hat_final",
            "control_effort")
    for key in keys:
        vals = ",".join(f"{m.as_dict()[key]:.12g}" for m in report.metrics)
        lines.append(f"{key},{vals}")
    cmp_path = out / "comparison.csv"
    cmp_path.write_text("\n".join(lines) + "\n")
    written.append(cmp_path)

    if plots:
        from . import plotting
        written.append(plotting.render_error_comparison(
            report.trajectories, report.kinds, out / "error_comparison.pdf"))
    return written
