"""Closed-loop simulation: trials, noise sweeps, and path-tracking sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, replace
from .controllers import DiscreteFlatnessController, FlatnessMPC, PDController
from .errors import FlatnessError
from .models import euler_step, flat_output
from .path import GeometricPath, fixed_reference, reference_generator

log = logging.getLogger(__name__)

RNG_NAME = "numpy.random.Generator(PCG64).standard_normal"

OK = "ok"
UNSTABLE = "unstable"
NUMERICAL_FAILURE = "numerical-failure"


def trial_seed(base_seed: int, trial: int) -> int:
    """Per-trial seed; depends only on ``(base_seed, trial)``."""
    ss = np.random.SeedSequence([int(base_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def make_controller(cfg: ExperimentConfig):
    dt = cfg.rates.dt
    if cfg.controller == "df":
        return DiscreteFlatnessController(cfg.df, cfg.model, dt)
    if cfg.controller == "fmpc":
        return FlatnessMPC(cfg.fmpc, cfg.model, dt)
    return PDController(cfg.pd, cfg.model, dt)


@dataclass
class TrialResult:
    controller: str
    seed: int
    status: str
    t: np.ndarray
    y_true: np.ndarray
    y_meas: np.ndarray
    y_ref: np.ndarray
    u: np.ndarray
    path_error: np.ndarray | None = None
    message: str = ""
    metrics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OK


def average_output_error(y_true, y_ref) -> float:
    return float(np.mean(np.linalg.norm(np.asarray(y_true) - np.asarray(y_ref), axis=1)))


def path_error_stats(errors) -> dict:
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        return {"median": np.nan, "q25": np.nan, "q75": np.nan, "max": np.nan}
    q25, med, q75 = np.percentile(e, [25, 50, 75])
    return {"median": float(med), "q25": float(q25), "q75": float(q75), "max": float(e.max())}


def run_trial(cfg: ExperimentConfig, seed: int) -> TrialResult:
    """Simulate one closed-loop trial.

    The plant runs ``rates.substeps`` Euler steps per controller step with the
    command held. Noise is added to the measured output once per controller
    step; the controller never sees the true state.
    """
    rng = np.random.default_rng(seed)
    dt = cfg.rates.dt
    substeps = cfg.rates.substeps
    h = dt / substeps
    sigma = np.asarray(cfg.noise.sigma, dtype=float)
    ctrl = make_controller(cfg)
    horizon = max(ctrl.horizon, 1)

    path = None
    if cfg.reference.kind == "path":
        path = GeometricPath(cfg.reference.waypoints)
        start = path.waypoints[0] if cfg.initial_position is None else cfg.initial_position
    else:
        start = [0.0, 0.0] if cfg.initial_position is None else cfg.initial_position

    state = np.zeros(6)
    state[[0, 2]] = start
    n_steps = int(round(cfg.duration / dt))
    y_true = np.full((n_steps, 2), np.nan)
    y_meas = np.full((n_steps, 2), np.nan)
    y_ref = np.full((n_steps, 2), np.nan)
    u_log = np.full((n_steps, 2), np.nan)
    status, message, done = OK, "", 0

    for k in range(n_steps):
        yt = flat_output(state)
        ym = yt + sigma * rng.standard_normal(2)
        if path is None:
            ref = fixed_reference(cfg.reference.point, horizon, dt)
        else:
            ref = reference_generator(path, ym, cfg.reference.speed, horizon, dt)
        y_true[k], y_meas[k], y_ref[k] = yt, ym, ref.positions[0]
        try:
            u = ctrl.step(ym, ref)
            u_log[k] = u
            for _ in range(substeps):
                state = euler_step(state, u, cfg.model, h)
        except FlatnessError as exc:
            status, message = NUMERICAL_FAILURE, str(exc)
            done = k + 1
            break
        done = k + 1
        if not np.all(np.isfinite(state)) or np.max(np.abs(state[[0, 2]])) > cfg.instability_bound:
            status, message = UNSTABLE, f"output exceeded {cfg.instability_bound:g} m at step {k}"
            break
        if path is not None and cfg.reference.stop_at_end:
            if path.project(yt)[1] >= path.length - cfg.reference.end_tolerance:
                break

    sl = slice(0, done)
    result = TrialResult(
        controller=cfg.controller,
        seed=int(seed),
        status=status,
        t=np.arange(done) * dt,
        y_true=y_true[sl],
        y_meas=y_meas[sl],
        y_ref=y_ref[sl],
        u=u_log[sl],
        message=message,
    )
    result.metrics["average_output_error"] = average_output_error(result.y_true, result.y_ref)
    if path is not None:
        result.path_error = np.array([path.distance(p) for p in result.y_true])
        result.metrics.update({f"path_error_{k}": v for k, v in path_error_stats(result.path_error).items()})
    return result


def _run_jobs(jobs, n_jobs: int):
    if n_jobs <= 1:
        return [run_trial(c, s) for c, s in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(run_trial, *zip(*jobs)))


def sweep_noise(cfg: ExperimentConfig, sigmas=None, trials: int | None = None,
                controllers=None, n_jobs: int = 1):
    """Average output error per ``(controller, sigma, trial)`` plus aggregates.

    Noise is applied to the x channel only. Trial ``i`` uses the same seed for
    every controller and sigma, so controllers see common random numbers.
    """
    sigmas = cfg.sweep.sigmas if sigmas is None else sigmas
    trials = cfg.trials if trials is None else trials
    controllers = cfg.sweep.controllers if controllers is None else controllers
    if trials < 1:
        raise ValueError("trials must be >= 1")
    keys, jobs = [], []
    for name in controllers:
        for sigma in sigmas:
            sub = replace(cfg, controller=name, noise={"sigma": [float(sigma), 0.0]})
            for i in range(trials):
                keys.append((name, float(sigma), i))
                jobs.append((sub, trial_seed(cfg.noise.seed, i)))
    results = _run_jobs(jobs, n_jobs)
    rows = [
        {
            "controller": name,
            "sigma": sigma,
            "trial": i,
            "seed": res.seed,
            "status": res.status,
            "average_output_error": res.metrics["average_output_error"],
        }
        for (name, sigma, i), res in zip(keys, results)
    ]
    aggregates = []
    for name in controllers:
        for sigma in sigmas:
            sel = [r for r in rows if r["controller"] == name and r["sigma"] == float(sigma)]
            good = [r["average_output_error"] for r in sel if r["status"] == OK]
            aggregates.append(
                {
                    "controller": name,
                    "sigma": float(sigma),
                    "mean_average_output_error": float(np.mean(good)) if good else float("nan"),
                    "std_average_output_error": float(np.std(good)) if good else float("nan"),
                    "n_ok": len(good),
                    "n_failed": len(sel) - len(good),
                }
            )
    return rows, aggregates


def track_path(cfg: ExperimentConfig, speeds=None, trials: int | None = None,
               controllers=None, n_jobs: int = 1):
    """Path-error statistics per ``(controller, speed)`` on the configured path.

    Each trial may last twice the nominal traversal time plus a settle time;
    with ``reference.stop_at_end`` it ends when the path end is reached.
    Unstable trials are reported, not raised.
    """
    speeds = cfg.path_sweep.speeds if speeds is None else speeds
    trials = cfg.trials if trials is None else trials
    controllers = cfg.path_sweep.controllers if controllers is None else controllers
    if any(s <= 0 for s in speeds):
        raise ValueError("desired speeds must be positive")
    path = GeometricPath(cfg.reference.waypoints)
    keys, jobs = [], []
    for name in controllers:
        for speed in speeds:
            duration = 2.0 * path.length / speed + cfg.path_sweep.settle_time
            sub = replace(
                cfg,
                controller=name,
                duration=duration,
                reference={"kind": "path", "speed": float(speed)},
                noise={"sigma": list(cfg.path_sweep.sigma)},
            )
            for i in range(trials):
                keys.append((name, float(speed), i))
                jobs.append((sub, trial_seed(cfg.noise.seed, i)))
    results = _run_jobs(jobs, n_jobs)
    rows = []
    for (name, speed, i), res in zip(keys, results):
        rows.append({"controller": name, "speed": speed, "trial": i, "seed": res.seed,
                     "status": res.status, **path_error_stats(res.path_error)})
    aggregates = []
    for name in controllers:
        for speed in speeds:
            sel = [(k, r) for k, r in zip(keys, results) if k[0] == name and k[1] == float(speed)]
            errors = np.concatenate([r.path_error for _, r in sel])
            n_unstable = sum(1 for _, r in sel if not r.ok)
            aggregates.append({"controller": name, "speed": float(speed), **path_error_stats(errors),
                               "n_trials": len(sel), "n_unstable": n_unstable})
    return rows, aggregates
