"""Explicit Runge-Kutta integration of smooth and piecewise-smooth fields.

Steps are clamped so that every output sample time is hit exactly; no
interpolation is involved in the recorded states. For piecewise fields each
step uses the local field of the active patch, and a step that leaves the
patch is cut back by bisection on its length until the crossing time is
pinned to ``event_tol``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import PiecewiseField, VectorField, single_patch
from .errors import DomainError, NumericError

METHODS = ("rk4_fixed", "rk45_adaptive")
STOP_REASONS = ("converged", "t_max", "blowup", "domain_error")

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45_adaptive"
    dt: float = 1e-2
    rtol: float = 1e-8
    atol: float = 1e-10
    t_max: float = 200.0
    sample_every: float = 0.01
    stop_field_norm: float = 1e-9
    stop_blowup: float = 1e8
    event_tol: float = 1e-12
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        for name in ("dt", "rtol", "atol", "t_max", "sample_every", "event_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dt > self.t_max:
            raise ValueError("dt must not exceed t_max")
        if self.stop_field_norm < 0:
            raise ValueError("stop_field_norm must be nonnegative")

    def replace(self, **changes) -> "IntegratorConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diagnostics: dict[str, np.ndarray]
    stop_reason: str
    events: list[dict] = field(default_factory=list)
    n_steps: int = 0

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.times.size


def monitor(traj: Trajectory, name: str, fn: Callable[[np.ndarray], float]) -> np.ndarray:
    """Evaluate ``fn`` on every sample and store the series under ``name``."""
    series = np.array([float(fn(s)) for s in traj.states])
    traj.diagnostics[name] = series
    return series


def _rk4(f, s, h, k1):
    k2 = f(s + 0.5 * h * k1)
    k3 = f(s + 0.5 * h * k2)
    k4 = f(s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dopri(f, s, h, k1):
    a = _A
    k2 = f(s + h * (a[1][0] * k1))
    k3 = f(s + h * (a[2][0] * k1 + a[2][1] * k2))
    k4 = f(s + h * (a[3][0] * k1 + a[3][1] * k2 + a[3][2] * k3))
    k5 = f(s + h * (a[4][0] * k1 + a[4][1] * k2 + a[4][2] * k3 + a[4][3] * k4))
    k6 = f(s + h * (a[5][0] * k1 + a[5][1] * k2 + a[5][2] * k3 + a[5][3] * k4 + a[5][4] * k5))
    b = _B5
    s_new = s + h * (b[0] * k1 + b[2] * k3 + b[3] * k4 + b[4] * k5 + b[5] * k6)
    k7 = f(s_new)
    e = _E
    err = h * (e[0] * k1 + e[2] * k3 + e[3] * k4 + e[4] * k5 + e[5] * k6 + e[6] * k7)
    return s_new, err, k7


def _err_norm(err, s, s_new, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(s), np.abs(s_new))
    return float(np.sqrt(np.mean((err / sc) ** 2)))


def _initial_step(f, s0, f0, cfg: IntegratorConfig) -> float:
    sc = cfg.atol + cfg.rtol * np.abs(s0)
    d0 = float(np.sqrt(np.mean((s0 / sc) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / sc) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(s0 + h0 * f0)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / sc) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, cfg.sample_every)


class _Run:
    """Mutable state of one integration; the public entry points wrap it."""

    def __init__(self, P: PiecewiseField, cfg: IntegratorConfig, detect_events: bool):
        self.P = P
        self.cfg = cfg
        self.detect = detect_events
        self.times: list[float] = []
        self.states: list[np.ndarray] = []
        self.norms: list[float] = []
        self.events: list[dict] = []
        self.patch = 0
        self.n_steps = 0

    def rhs(self, patch: int) -> Callable[[np.ndarray], np.ndarray]:
        fld = self.P.patches[patch].field
        return fld.__call__

    def choose_patch(self, s, tol: float) -> int:
        m = self.P.memberships(s)
        cand = [i for i, v in enumerate(m) if v >= -tol]
        if not cand:
            raise DomainError(f"state {s} lies outside every patch closure")
        if len(cand) == 1 or not self.detect:
            return cand[0]
        for i in cand:
            if m[i] > tol:
                return i
        for i in cand:
            v = self.P.patches[i].field(s)
            eps = 1e-7 / max(1.0, float(np.linalg.norm(v)))
            if self.P.patches[i].membership(s + eps * v) > m[i]:
                return i
        return cand[0]

    def record(self, t: float, s: np.ndarray, fs: np.ndarray) -> None:
        if self.times and t <= self.times[-1]:
            return
        self.times.append(t)
        self.states.append(s.copy())
        self.norms.append(float(np.linalg.norm(fs)))

    def step(self, f, s, h, fs):
        if self.cfg.method == "rk4_fixed":
            s_new = _rk4(f, s, h, fs)
            return s_new, None, None
        return _dopri(f, s, h, fs)

    def locate_event(self, f, s, h, fs, patch):
        memb = self.P.patches[patch].membership
        lo, hi = 0.0, h
        while hi - lo > self.cfg.event_tol:
            mid = 0.5 * (lo + hi)
            trial = self.step(f, s, mid, fs)[0]
            if memb(trial) >= 0.0:
                lo = mid
            else:
                hi = mid
            if mid == lo == hi:
                break
        return lo, hi

    def finish(self, reason: str) -> "Trajectory":
        states = np.array(self.states, dtype=float).reshape(len(self.states), self.P.dim)
        return Trajectory(
            np.array(self.times),
            states,
            {"field_norm": np.array(self.norms)},
            reason,
            self.events,
            self.n_steps,
        )

    def run(self, s0: np.ndarray) -> "Trajectory":
        cfg = self.cfg
        tol_c = self.P.closure_tol
        s = np.asarray(s0, dtype=float).copy()
        t = 0.0
        try:
            self.patch = self.choose_patch(s, tol_c)
            f = self.rhs(self.patch)
            fs = f(s)
        except DomainError:
            raise
        self.record(t, s, fs)
        if float(np.linalg.norm(fs)) < cfg.stop_field_norm:
            return self.finish("converged")
        k = 1
        next_sample = min(k * cfg.sample_every, cfg.t_max)
        adaptive = cfg.method == "rk45_adaptive"
        h = _initial_step(f, s, fs, cfg) if adaptive else cfg.dt
        skip_event_once = False
        while True:
            if self.n_steps >= cfg.max_steps:
                raise NumericError(f"step budget {cfg.max_steps} exhausted at t={t}")
            target = next_sample
            h_try = min(h, target - t)
            landing = t + h_try >= target - 1e-12 * max(1.0, abs(target))
            if landing:
                h_try = target - t
            try:
                s_new, err, f_new = self.step(f, s, h_try, fs)
            except DomainError:
                return self.finish("domain_error")
            if adaptive:
                en = _err_norm(err, s, s_new, cfg.rtol, cfg.atol)
                if not math.isfinite(en) or en > 1.0:
                    fac = 0.2 if not math.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
                    h = h_try * fac
                    if h < 1e-14 * max(1.0, abs(t)):
                        raise NumericError(f"step size underflow at t={t}")
                    continue
                grow = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                h_next = h_try * grow
                if landing and h_try < h:
                    # a step shortened to hit a sample time must not shrink the working step
                    h_next = max(h_next, h)
            else:
                h_next = cfg.dt
            event = None
            if self.detect and not skip_event_once:
                memb = self.P.patches[self.patch].membership
                if memb(s_new) < -tol_c:
                    lo, hi = self.locate_event(f, s, h_try, fs, self.patch)
                    h_try = lo
                    landing = False
                    try:
                        s_new = self.step(f, s, h_try, fs)[0] if lo > 0 else s.copy()
                    except DomainError:
                        return self.finish("domain_error")
                    event = {"from": self.patch, "membership": float(memb(s_new))}
            skip_event_once = False
            self.n_steps += 1
            t = target if landing else t + h_try
            s = s_new
            if not np.all(np.isfinite(s)) or float(np.linalg.norm(s)) > cfg.stop_blowup:
                self.times.append(t)
                self.states.append(s.copy())
                self.norms.append(float("nan"))
                return self.finish("blowup")
            try:
                if event is not None:
                    new_patch = self.choose_patch(s, max(tol_c, 1e-9))
                    if new_patch == self.patch:
                        skip_event_once = True
                    event.update({"time": t, "state": s.tolist(), "to": new_patch})
                    self.events.append(event)
                    self.patch = new_patch
                    f = self.rhs(self.patch)
                    fs = f(s)
                elif f_new is not None:
                    fs = f_new
                else:
                    fs = f(s)
            except DomainError:
                return self.finish("domain_error")
            h = h_next
            norm = float(np.linalg.norm(fs))
            if landing:
                self.record(t, s, fs)
                k += 1
                next_sample = min(k * cfg.sample_every, cfg.t_max)
            if norm < cfg.stop_field_norm:
                self.record(t, s, fs)
                return self.finish("converged")
            if t >= cfg.t_max:
                self.record(t, s, fs)
                return self.finish("t_max")


def integrate(X: VectorField, s0, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate a smooth field from ``s0``; see :class:`IntegratorConfig` for stop rules."""
    cfg = cfg or IntegratorConfig()
    s0 = X.check(s0)
    return _Run(single_patch(X), cfg, detect_events=False).run(s0)


def integrate_piecewise(P: PiecewiseField, s0, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate a piecewise field, localizing every patch-boundary crossing."""
    cfg = cfg or IntegratorConfig()
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (P.dim,):
        raise DomainError(f"{P.name}: state must have length {P.dim}")
    P.patch_index(s0)
    return _Run(P, cfg, detect_events=True).run(s0)
