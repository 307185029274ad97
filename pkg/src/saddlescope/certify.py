"""Sampling-based certificates for saddle-point stability hypotheses.

Every check draws its samples from its own seeded generator, so verdicts are
reproducible. A ``pass`` means that no violation was found at the recorded
sample size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import linalg
from .dynamics import PiecewiseField, VectorField, jacobian_at, limit_jacobians
from .errors import ContractError, DomainError
from .functions import SaddleFunction, eval_F, grad, hess_blocks
from .integrate import Trajectory
from .report import FAIL, INCONCLUSIVE, PASS, Certificate, witness

Array = np.ndarray
Field = Union[VectorField, PiecewiseField]


# ---------------------------------------------------------------------------
# saddle-set descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SaddleSetDescriptor:
    """A closed set with closed-form projection, distance and proximal normals.

    ``normal_project(y, v)`` maps an ambient direction ``v`` to its component
    in the proximal normal cone of the set at the set point ``y``.
    """

    name: str
    ambient_dim: int
    param_dim: int
    embed: Callable[[Array], Array]
    project: Callable[[Array], list]
    distance: Callable[[Array], float]
    normal_project: Callable[[Array, Array], Array]
    sample_params: Callable[[np.random.Generator, int], Array]
    description: str = ""

    def normal_at(self, y, direction) -> Array:
        v = self.normal_project(np.asarray(y, dtype=float), np.asarray(direction, dtype=float))
        nv = float(np.linalg.norm(v))
        if nv < 1e-12:
            raise ContractError("direction has no component in the normal cone")
        return v / nv

    def sample_points(self, rng: np.random.Generator, k: int) -> Array:
        thetas = self.sample_params(rng, k)
        return np.array([self.embed(th) for th in thetas]).reshape(k, self.ambient_dim)


def affine_set(name: str, offset, basis=None, param_box: float = 3.0, description: str = "") -> SaddleSetDescriptor:
    """offset + span(basis); ``basis`` columns are orthonormalized."""
    offset = np.asarray(offset, dtype=float)
    d = offset.size
    if basis is None or np.size(basis) == 0:
        B = np.zeros((d, 0))
    else:
        B, _ = np.linalg.qr(np.asarray(basis, dtype=float).reshape(d, -1))
    p = B.shape[1]
    PB = B @ B.T

    def embed(theta):
        return offset + B @ np.asarray(theta, dtype=float).reshape(p)

    def project(s):
        s = np.asarray(s, dtype=float)
        return [offset + PB @ (s - offset)]

    def distance(s):
        s = np.asarray(s, dtype=float)
        return float(np.linalg.norm((s - offset) - PB @ (s - offset)))

    def normal_project(y, v):
        return v - PB @ v

    def sample_params(rng, k):
        return rng.uniform(-param_box, param_box, size=(k, p))

    return SaddleSetDescriptor(name, d, p, embed, project, distance, normal_project, sample_params, description)


def circle_set(
    name: str, ambient_dim: int, plane: tuple[int, int], center, radius: float, description: str = ""
) -> SaddleSetDescriptor:
    """Circle of given radius in the coordinate plane ``plane`` through ``center``."""
    i, j = plane
    center = np.asarray(center, dtype=float)
    rest = [k for k in range(ambient_dim) if k not in plane]
    n_full = 64

    def embed(theta):
        th = float(np.asarray(theta).reshape(-1)[0])
        y = center.copy()
        y[i] += radius * math.cos(th)
        y[j] += radius * math.sin(th)
        return y

    def project(s):
        s = np.asarray(s, dtype=float)
        w = np.array([s[i] - center[i], s[j] - center[j]])
        nw = float(np.hypot(w[0], w[1]))
        if nw < 1e-14:
            # every circle point is nearest; return a uniform discretization
            return [embed(2 * math.pi * k / n_full) for k in range(n_full)]
        y = center.copy()
        y[i] += radius * w[0] / nw
        y[j] += radius * w[1] / nw
        return [y]

    def distance(s):
        s = np.asarray(s, dtype=float)
        nw = float(np.hypot(s[i] - center[i], s[j] - center[j]))
        off = s[rest] - center[rest]
        return float(math.sqrt((nw - radius) ** 2 + float(off @ off)))

    def normal_project(y, v):
        t = np.zeros(ambient_dim)
        t[i] = -(y[j] - center[j]) / radius
        t[j] = (y[i] - center[i]) / radius
        return v - (v @ t) * t

    def sample_params(rng, k):
        return rng.uniform(0.0, 2 * math.pi, size=(k, 1))

    return SaddleSetDescriptor(name, ambient_dim, 1, embed, project, distance, normal_project, sample_params, description)


def half_line_set(name: str = "half_line", length: float = 8.0, description: str = "") -> SaddleSetDescriptor:
    """{(x, 0) : x <= 0} in R^2."""

    def embed(theta):
        return np.array([float(np.asarray(theta).reshape(-1)[0]), 0.0])

    def project(s):
        return [np.array([min(float(s[0]), 0.0), 0.0])]

    def distance(s):
        return float(math.hypot(max(float(s[0]), 0.0), float(s[1])))

    def normal_project(y, v):
        if y[0] < 0:
            return np.array([0.0, v[1]])
        return np.array([max(v[0], 0.0), v[1]])

    def sample_params(rng, k):
        return rng.uniform(-length, 0.0, size=(k, 1))

    return SaddleSetDescriptor(name, 2, 1, embed, project, distance, normal_project, sample_params, description)


@dataclass(frozen=True)
class NeighborhoodSpec:
    center: tuple
    radius: float
    samples: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")

    @property
    def center_array(self) -> Array:
        return np.asarray(self.center, dtype=float)

    def draw(self, rng: Optional[np.random.Generator] = None, include_center: bool = True) -> Array:
        rng = rng or np.random.default_rng(self.seed)
        c = self.center_array
        pts = sample_ball(c, self.radius, self.samples, rng)
        if include_center:
            pts[0] = c
        return pts

    def tag(self) -> dict:
        return {"count": self.samples, "seed": self.seed, "radius": self.radius,
                "center": list(map(float, self.center))}


def sample_ball(center, radius: float, k: int, rng: np.random.Generator) -> Array:
    """``k`` points uniform in the closed Euclidean ball."""
    c = np.asarray(center, dtype=float)
    d = c.size
    g = rng.normal(size=(k, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(k, 1)) ** (1.0 / d)
    return c + r * g


# ---------------------------------------------------------------------------
# pointwise checks
# ---------------------------------------------------------------------------


def _def_tol(M: Array, base: float) -> float:
    return base * (1.0 + float(np.max(np.abs(M), initial=0.0)))


def check_critical(F: SaddleFunction, point, tol: float = 1e-8, def_tol: float = 1e-9) -> Certificate:
    """Critical point with the min-max sign pattern H_xx >= 0, H_zz <= 0."""
    x, z = F.split(point)
    gx = grad(F, "x", x, z)
    gz = grad(F, "z", x, z)
    gnorm = max(float(np.linalg.norm(gx)), float(np.linalg.norm(gz)))
    tols = {"grad_tol": tol, "def_tol": def_tol}
    constants = {"grad_x_norm": float(np.linalg.norm(gx)), "grad_z_norm": float(np.linalg.norm(gz))}
    if gnorm >= tol:
        return Certificate("critical", FAIL, tols, {"count": 1},
                           witness(point, gnorm, reason="gradient"), constants)
    if F.order >= 2:
        hxx, _, hzz = hess_blocks(F, x, z)
        lo = float(linalg.symmetric_eigenvalues(hxx)[0])
        hi = float(linalg.symmetric_eigenvalues(hzz)[-1])
        constants.update({"min_eig_hxx": lo, "max_eig_hzz": hi})
        viol = max(-lo - _def_tol(hxx, def_tol), hi - _def_tol(hzz, def_tol))
        if viol > 0:
            return Certificate("critical", FAIL, tols, {"count": 1},
                               witness(point, viol, reason="saddle sign pattern"), constants)
    return Certificate("critical", PASS, tols, {"count": 1}, constants=constants)


def check_equilibrium(X: Field, point, tol: float = 1e-10) -> Certificate:
    v = float(np.linalg.norm(X(np.asarray(point, dtype=float))))
    tols = {"tol": tol}
    if v >= tol:
        return Certificate("equilibrium", FAIL, tols, {"count": 1}, witness(point, v), {"field_norm": v})
    return Certificate("equilibrium", PASS, tols, {"count": 1}, constants={"field_norm": v})


def check_convex_concave(
    F: SaddleFunction, nbhd: NeighborhoodSpec, strict: bool = False, def_tol: float = 1e-9
) -> Certificate:
    """Sampled second-order test of convexity in x and concavity in z.

    With ``strict``, additionally requires H_xx > 0 along the x-slice through
    the center or H_zz < 0 along the z-slice (either one suffices).
    """
    name = "convex-concave-strict" if strict else "convex-concave"
    rng = np.random.default_rng(nbhd.seed)
    pts = nbhd.draw(rng)
    worst_v, worst_p = -np.inf, None
    tols = {"def_tol": def_tol}
    for s in pts:
        x, z = F.split(s)
        hxx, _, hzz = hess_blocks(F, x, z)
        lo = float(linalg.symmetric_eigenvalues(hxx)[0])
        hi = float(linalg.symmetric_eigenvalues(hzz)[-1])
        v = max(-lo - _def_tol(hxx, def_tol), hi - _def_tol(hzz, def_tol))
        if v > worst_v:
            worst_v, worst_p = v, s
    samples = nbhd.tag()
    if worst_v > 0:
        return Certificate(name, FAIL, tols, samples, witness(worst_p, worst_v, reason="not convex-concave"))
    if not strict:
        return Certificate(name, PASS, tols, samples, witness(worst_p, worst_v))
    c = nbhd.center_array
    xc, zc = F.split(c)
    xs = sample_ball(xc, nbhd.radius, nbhd.samples, rng)
    zs = sample_ball(zc, nbhd.radius, nbhd.samples, rng)
    xs[0], zs[0] = xc, zc
    min_x = min(float(linalg.symmetric_eigenvalues(hess_blocks(F, x, zc)[0])[0]) for x in xs)
    max_z = max(float(linalg.symmetric_eigenvalues(hess_blocks(F, xc, z)[2])[-1]) for z in zs)
    constants = {"min_eig_hxx_on_x_slice": min_x, "max_eig_hzz_on_z_slice": max_z}
    if min_x > def_tol or max_z < -def_tol:
        return Certificate(name, PASS, tols, samples, constants=constants,
                           notes=["strict in x" if min_x > def_tol else "strict in z"])
    return Certificate(name, FAIL, tols, samples,
                       witness(c, min(min_x, -max_z), reason="neither slice strictly convex/concave"),
                       constants)


def check_linearity_in_z(F: SaddleFunction, nbhd: NeighborhoodSpec, tol: float = 1e-8) -> Certificate:
    rng = np.random.default_rng(nbhd.seed)
    pts = nbhd.draw(rng)
    partners = pts[rng.permutation(len(pts))]
    worst_v, worst_p = -np.inf, None
    for s, s2 in zip(pts, partners):
        x, z = F.split(s)
        z2 = F.split(s2)[1]
        hzz = hess_blocks(F, x, z)[2]
        dz = float(np.max(np.abs(grad(F, "z", x, z) - grad(F, "z", x, z2))))
        v = max(float(np.max(np.abs(hzz))), dz)
        if v > worst_v:
            worst_v, worst_p = v, s
    verdict = PASS if worst_v <= tol else FAIL
    return Certificate("linear-in-z", verdict, {"tol": tol}, nbhd.tag(), witness(worst_p, worst_v))


def check_level_set_in_saddle_set(
    F: SaddleFunction, S: SaddleSetDescriptor, nbhd: NeighborhoodSpec,
    level_tol: float = 1e-12, dist_tol: float = 1e-4, max_newton: int = 200,
) -> Certificate:
    """Points x with F(x, z*) = F(x*, z*) near x* must be saddle points.

    Starting from sampled x around x*, Newton steps on F(., z*) - F* drive
    each sample onto the level set; its distance to S is then measured. The
    neighborhood radius is part of the record.
    """
    rng = np.random.default_rng(nbhd.seed)
    c = nbhd.center_array
    xs_, zs_ = F.split(c)
    fstar = eval_F(F, xs_, zs_)
    starts = sample_ball(xs_, nbhd.radius, nbhd.samples, rng)
    worst_v, worst_p, unresolved = -np.inf, None, 0
    for x in starts:
        for _ in range(max_newton):
            gap = eval_F(F, x, zs_) - fstar
            if abs(gap) <= level_tol:
                break
            g = grad(F, "x", x, zs_)
            gg = float(g @ g)
            if gg == 0.0:
                break
            x = x - gap * g / gg
        if abs(eval_F(F, x, zs_) - fstar) > level_tol:
            unresolved += 1
            continue
        d = S.distance(np.concatenate([x, zs_]))
        if d > worst_v:
            worst_v, worst_p = d, np.concatenate([x, zs_])
    samples = nbhd.tag()
    tols = {"level_tol": level_tol, "dist_tol": dist_tol}
    if worst_p is None:
        return Certificate("level-set-in-saddle-set", INCONCLUSIVE, tols, samples,
                           notes=["no sample reached the level set"])
    notes = [f"{unresolved} samples did not reach the level set"] if unresolved else []
    verdict = PASS if worst_v <= dist_tol else FAIL
    return Certificate("level-set-in-saddle-set", verdict, tols, samples,
                       witness(worst_p, worst_v), {"F_star": fstar}, notes=notes)


# ---------------------------------------------------------------------------
# quasiconvexity
# ---------------------------------------------------------------------------


def slice_function(F: SaddleFunction, which: str, point) -> tuple[Callable, Callable, Array]:
    """Scalar slice through ``point``: u -> F(u, z) for 'x', u -> -F(x, u) for 'z'.

    Returns (f, grad_f, center). The z-slice is negated so that
    quasiconcavity of F in z becomes quasiconvexity of f.
    """
    x0, z0 = F.split(point)
    if which == "x":
        return (lambda u: eval_F(F, u, z0)), (lambda u: grad(F, "x", u, z0)), x0
    if which == "z":
        return (lambda u: -eval_F(F, x0, u)), (lambda u: -grad(F, "z", x0, u)), z0
    raise ValueError("slice must be 'x' or 'z'")


def _pair_grid(center: Array, radius: float, grid: int, rng, pairs: int):
    if center.size == 1:
        g = np.linspace(center[0] - radius, center[0] + radius, grid)
        us, vs = np.meshgrid(g, g, indexing="ij")
        return us.reshape(-1, 1), vs.reshape(-1, 1)
    u = sample_ball(center, radius, pairs, rng)
    v = sample_ball(center, radius, pairs, rng)
    return u, v


def fit_strong_quasi(f: Callable, center, radius: float, grid: int = 50, n_lambda: int = 21,
                     pairs: int = 2000, seed: int = 0) -> tuple[float, Array]:
    """Largest s with max(f(u), f(v)) - f(lu + (1-l)v) >= s l (1-l) |u-v|^2 on the sample.

    One-dimensional slices use a full ``grid`` x ``grid`` x ``n_lambda``
    grid; higher dimensions use ``pairs`` random pairs in the ball.
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))
    rng = np.random.default_rng(seed)
    us, vs = _pair_grid(c, radius, grid, rng, pairs)
    lams = np.linspace(0.0, 1.0, n_lambda)[1:-1]
    best, arg = np.inf, None
    for u, v in zip(us, vs):
        dist2 = float((u - v) @ (u - v))
        if dist2 == 0.0:
            continue
        top = max(f(u), f(v))
        for lam in lams:
            ratio = (top - f(lam * u + (1 - lam) * v)) / (lam * (1 - lam) * dist2)
            if ratio < best:
                best, arg = ratio, np.concatenate([u, v, [lam]])
    return float(best), arg


def check_strong_quasi(f: Callable, center, radius: float, s_min: float, grid: int = 50,
                       n_lambda: int = 21, pairs: int = 2000, seed: int = 0,
                       name: str = "strong-quasiconvex") -> Certificate:
    if not s_min > 0:
        raise ContractError("s_min must be positive")
    s_fit, arg = fit_strong_quasi(f, center, radius, grid, n_lambda, pairs, seed)
    c = np.atleast_1d(np.asarray(center, dtype=float))
    samples = {"grid": grid if c.size == 1 else None, "pairs": None if c.size == 1 else pairs,
               "n_lambda": n_lambda, "seed": seed, "radius": radius}
    verdict = PASS if s_fit >= s_min else FAIL
    return Certificate(name, verdict, {"s_min": s_min}, samples,
                       witness(arg, s_min - s_fit, reason="fitted s below s_min"), {"s": s_fit})


def check_first_order_quasi(f: Callable, grad_f: Callable, center, radius: float, s: float,
                            grid: int = 50, pairs: int = 2000, seed: int = 0,
                            slack: float = 1e-9) -> Certificate:
    """f(x) <= f(y) implies grad f(y).(x - y) <= -s |x - y|^2 on sampled pairs."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    rng = np.random.default_rng(seed)
    xs, ys = _pair_grid(c, radius, grid, rng, pairs)
    worst_v, worst_p, used = -np.inf, None, 0
    for x, y in zip(xs, ys):
        if f(x) > f(y):
            continue
        used += 1
        d = x - y
        v = float(np.asarray(grad_f(y)) @ d) + s * float(d @ d)
        if v > worst_v:
            worst_v, worst_p = v, np.concatenate([x, y])
    samples = {"pairs_used": used, "seed": seed, "radius": radius}
    verdict = PASS if worst_v <= slack else FAIL
    return Certificate("first-order-quasi", verdict, {"s": s, "slack": slack}, samples,
                       witness(worst_p, worst_v))


# ---------------------------------------------------------------------------
# set-level checks
# ---------------------------------------------------------------------------


def check_constant_on_set(F: SaddleFunction, S: SaddleSetDescriptor, samples: int = 100,
                          tol: float = 1e-9, seed: int = 0) -> Certificate:
    rng = np.random.default_rng(seed)
    pts = S.sample_points(rng, samples)
    vals = np.array([eval_F(F, *F.split(p)) for p in pts])
    spread = float(vals.max() - vals.min())
    i = int(np.argmax(np.abs(vals - np.median(vals))))
    verdict = PASS if spread < tol else FAIL
    return Certificate("constant-on-set", verdict, {"tol": tol}, {"count": samples, "seed": seed},
                       witness(pts[i], spread), {"value": float(np.median(vals)), "spread": spread})


def _matrices_of(X: Field, point) -> list[Array]:
    if isinstance(X, PiecewiseField):
        return limit_jacobians(X, point)
    return [jacobian_at(X, point)]


def spectrum_report(X: Field, point, p: int) -> Certificate:
    """Zero eigenvalue semisimple with multiplicity p, the rest strictly stable."""
    mats = _matrices_of(X, point)
    spectra = []
    worst_v, reason = -np.inf, ""
    for J in mats:
        sp = linalg.eigenvalues(J)
        semi = linalg.zero_is_semisimple(J, sp)
        spectra.append({
            "eigenvalues": [complex(e) for e in sp.eigenvalues],
            "zero_multiplicity": sp.zero_multiplicity,
            "semisimple": semi,
            "tol_zero": sp.tol_zero,
        })
        if sp.zero_multiplicity != p:
            v, r = float(abs(sp.zero_multiplicity - p)), f"zero multiplicity {sp.zero_multiplicity} != {p}"
        elif not semi:
            v, r = 1.0, "zero eigenvalue not semisimple"
        else:
            v = sp.max_real_part_nonzero + sp.tol_zero if sp.nonzero.size else -sp.tol_zero
            r = "nonzero eigenvalue with real part >= -tol_zero"
        if v > worst_v:
            worst_v, reason = v, r
    constants = {"spectra": spectra, "p": p}
    if worst_v > 0:
        return Certificate("spectrum", FAIL, {"tol_zero": "1e-7*(1+rho)"}, {"matrices": len(mats)},
                           witness(point, worst_v, reason=reason), constants)
    return Certificate("spectrum", PASS, {"tol_zero": "1e-7*(1+rho)"}, {"matrices": len(mats)},
                       constants=constants)


def check_lemma_eigenvalue(F: SaddleFunction, point, radius: float = 1e-2, tol: float = 1e-9) -> Certificate:
    """range(H_xz) and null(H_xx) meet only at 0 (for F linear in z)."""
    lin = check_linearity_in_z(F, NeighborhoodSpec(tuple(np.asarray(point, dtype=float)), radius, 20, 0))
    if not lin.passed:
        return Certificate("lemma-eigenvalue", INCONCLUSIVE, {"tol": tol}, {"count": 1},
                           notes=["F is not linear in z near the point"])
    x, z = F.split(point)
    hxx, hxz, _ = hess_blocks(F, x, z)
    flags = []
    if np.max(np.abs(hxz)) <= tol:
        flags.append("degenerate: mixed block vanishes")
    basis = linalg.range_null_intersection(hxz, hxx, tol)
    constants = {"intersection_dim": int(basis.shape[1])}
    if basis.shape[1] == 0:
        return Certificate("lemma-eigenvalue", PASS, {"tol": tol}, {"count": 1},
                           constants=constants, flags=flags)
    return Certificate("lemma-eigenvalue", FAIL, {"tol": tol}, {"count": 1},
                       witness(point, 1.0, basis=basis.T.tolist()), constants, flags)


@dataclass(frozen=True)
class ProximalConstants:
    k1: float
    alpha1: float
    k2: float
    beta1: float
    L_x: float
    alpha2: float
    L_z: float
    beta2: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def check_proximal_hypotheses(
    F: SaddleFunction, S: SaddleSetDescriptor, lambda_M: float, c: ProximalConstants,
    n_points: int = 12, n_dirs: int = 12, n_lambda: int = 24, n_t: int = 11, seed: int = 0,
    rel_slack: float = 1e-8, abs_slack: float = 1e-14,
) -> Certificate:
    """Growth and mixed-Hessian bounds along unit proximal normals.

    (a) midpoint convexity/concavity of the two slices along the normal,
    (b) the power-law growth bounds with (k1, alpha1) and (k2, beta1),
    (c) the mixed-Hessian variation bound with (L_x, alpha2, L_z, beta2),
    (d) L_x = 0 or alpha1 <= alpha2 + 1, and L_z = 0 or beta1 <= beta2 + 1.
    """
    tols = {"rel_slack": rel_slack, "abs_slack": abs_slack, "lambda_M": lambda_M}
    samples = {"set_points": n_points, "directions": n_dirs, "lambdas": n_lambda, "ts": n_t, "seed": seed}
    constants = c.as_dict()
    if not lambda_M > 0:
        return Certificate("proximal", INCONCLUSIVE, tols, samples, constants=constants,
                           flags=["degenerate lambda grid"])
    rng = np.random.default_rng(seed)
    n = F.n
    lams = lambda_M * np.arange(1, n_lambda + 1) / (n_lambda + 1)
    ts = np.linspace(0.0, 1.0, n_t)
    worst = {"a": (-np.inf, None), "b": (-np.inf, None), "c": (-np.inf, None)}

    def note(part, v, where):
        if v > worst[part][0]:
            worst[part] = (v, where)

    def ge(lhs, rhs):
        # violation of lhs >= rhs, with multiplicative and absolute slack
        return rhs - lhs * (1 + rel_slack) - abs_slack if lhs >= 0 else rhs - lhs * (1 - rel_slack) - abs_slack

    for y in S.sample_points(rng, n_points):
        xs, zs = F.split(y)
        f0 = eval_F(F, xs, zs)
        for _ in range(n_dirs):
            eta = S.normal_at(y, rng.normal(size=S.ambient_dim))
            ex, ez = eta[:n], eta[n:]
            gx = np.array([eval_F(F, xs + l * ex, zs) for l in lams])
            gz = np.array([eval_F(F, xs, zs + l * ez) for l in lams])
            # (a) midpoint tests over the lambda grid, including lambda = 0
            gx0 = np.concatenate([[f0], gx])
            gz0 = np.concatenate([[f0], gz])
            ll = np.concatenate([[0.0], lams])
            for i in range(len(ll)):
                for j in range(i + 2, len(ll), 2):
                    mid = (i + j) // 2
                    if not math.isclose(ll[mid], 0.5 * (ll[i] + ll[j]), rel_tol=1e-12):
                        continue
                    scale = abs_slack + rel_slack * max(abs(gx0[i]), abs(gx0[j]), abs(gz0[i]), abs(gz0[j]))
                    note("a", gx0[mid] - 0.5 * (gx0[i] + gx0[j]) - scale, eta)
                    note("a", 0.5 * (gz0[i] + gz0[j]) - gz0[mid] - scale, eta)
            # (b) growth bounds
            for l, a, b in zip(lams, gx, gz):
                note("b", ge(a - f0, c.k1 * (l * np.linalg.norm(ex)) ** c.alpha1), np.concatenate([eta, [l]]))
                note("b", ge(f0 - b, c.k2 * (l * np.linalg.norm(ez)) ** c.beta1), np.concatenate([eta, [l]]))
            # (c) variation of the mixed block
            for l in lams:
                bound = c.L_x * (l * np.linalg.norm(ex)) ** c.alpha2 + c.L_z * (l * np.linalg.norm(ez)) ** c.beta2
                for t in ts:
                    h1 = hess_blocks(F, xs + t * l * ex, zs + l * ez)[1]
                    h2 = hess_blocks(F, xs + l * ex, zs + t * l * ez)[1]
                    lhs = float(np.linalg.norm(h1 - h2, 2))
                    note("c", ge(bound, lhs), np.concatenate([eta, [l, t]]))
    cond_x = c.L_x == 0 or c.alpha1 <= c.alpha2 + 1
    cond_z = c.L_z == 0 or c.beta1 <= c.beta2 + 1
    parts = {k: float(v[0]) for k, v in worst.items()}
    constants["worst_violation"] = parts
    constants["conditions_d"] = {"x": bool(cond_x), "z": bool(cond_z)}
    failing = [k for k, v in parts.items() if v > 0]
    if not (cond_x and cond_z):
        failing.append("d")
    if failing:
        k = max((p for p in failing if p != "d"), key=lambda p: parts[p], default="d")
        where = worst[k][1] if k != "d" else np.zeros(1)
        return Certificate("proximal", FAIL, tols, samples,
                           witness(where, parts.get(k, 1.0), part=k, failing=failing), constants)
    return Certificate("proximal", PASS, tols, samples, constants=constants)


def lie_derivative_V(F: SaddleFunction, saddle, state) -> float:
    """Derivative of |s - s*|^2 / 2 along the saddle-point flow at ``state``."""
    xs, zs = F.split(saddle)
    x, z = F.split(state)
    return float(-(x - xs) @ grad(F, "x", x, z) + (z - zs) @ grad(F, "z", x, z))


def check_lie_nonpositive(F: SaddleFunction, saddle, nbhd: NeighborhoodSpec, tol: float = 1e-12) -> Certificate:
    rng = np.random.default_rng(nbhd.seed)
    pts = nbhd.draw(rng)
    vals = np.array([lie_derivative_V(F, saddle, s) for s in pts])
    i = int(np.argmax(vals))
    verdict = PASS if vals[i] <= tol else FAIL
    return Certificate("lie-derivative", verdict, {"tol": tol}, nbhd.tag(), witness(pts[i], vals[i]),
                       {"max_lie_derivative": float(vals[i])})


def distance_series(traj: Trajectory, S: SaddleSetDescriptor) -> Array:
    return np.array([S.distance(s) for s in traj.states])


def distance_diagnostics(traj: Trajectory, S: SaddleSetDescriptor, final_tol: float = 1e-3,
                         mono_rel: float = 1e-6, require_monotone: bool = True) -> Certificate:
    """Distance-to-set series: nonincreasing (up to slack) and small at the end."""
    d = distance_series(traj, S)
    slack = mono_rel * (1.0 + d[0])
    inc = np.diff(d)
    worst_inc = float(inc.max()) if inc.size else 0.0
    monotone = worst_inc <= slack
    final = float(d[-1])
    tols = {"final_tol": final_tol, "monotone_slack": slack}
    constants = {"d0": float(d[0]), "final_distance": final, "max_increase": worst_inc,
                 "monotone": bool(monotone)}
    flags = [] if monotone else ["non-monotone"]
    ok = final < final_tol and (monotone or not require_monotone)
    if ok:
        return Certificate("distance", PASS, tols, {"count": int(d.size)}, constants=constants, flags=flags)
    if final >= final_tol:
        wit = witness(traj.endpoint, final - final_tol, reason="final distance")
    else:
        k = int(np.argmax(inc))
        wit = witness(traj.states[k + 1], worst_inc - slack, reason="distance increased", time=float(traj.times[k + 1]))
    return Certificate("distance", FAIL, tols, {"count": int(d.size)}, wit, constants, flags)


def check_conserved(traj: Trajectory, fn: Callable[[Array], float], tol: float,
                    name: str = "conserved") -> Certificate:
    vals = np.array([fn(s) for s in traj.states])
    drift = np.abs(vals - vals[0])
    i = int(np.argmax(drift))
    verdict = PASS if drift[i] < tol else FAIL
    return Certificate(name, verdict, {"tol": tol}, {"count": int(vals.size)},
                       witness(traj.states[i], drift[i]), {"initial": float(vals[0]), "max_drift": float(drift[i])})


def check_linear_in_x_hypotheses(
    g: Callable[[Array], Array], x_star, z_star, z_grid: Sequence, tol: float = 1e-9, tol_g: float = 1e-6
) -> Certificate:
    """For F(x, z) = g(z).x: F(x*, z) <= F(x*, z*) on the grid, and g(z).x* ~ 0 forces g(z) ~ 0."""
    xs = np.atleast_1d(np.asarray(x_star, dtype=float))
    zs = np.atleast_1d(np.asarray(z_star, dtype=float))
    fstar = float(np.asarray(g(zs)) @ xs)
    worst_i, wi_z = -np.inf, None
    worst_ii, wii_z = -np.inf, None
    all_zero = True
    for z in z_grid:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        gz = np.atleast_1d(np.asarray(g(z), dtype=float))
        if np.any(gz != 0):
            all_zero = False
        val = float(gz @ xs)
        if val - fstar > worst_i:
            worst_i, wi_z = val - fstar, z
        if abs(val) < tol:
            v = float(np.linalg.norm(gz)) - tol_g
            if v > worst_ii:
                worst_ii, wii_z = v, z
    tols = {"tol": tol, "tol_g": tol_g}
    samples = {"count": len(z_grid)}
    flags = ["degenerate: g vanishes on the grid"] if all_zero else []
    constants = {"F_star": fstar, "max_excess_i": float(worst_i),
                 "max_violation_ii": float(worst_ii) if np.isfinite(worst_ii) else -1.0}
    notes = ["boundedness of trajectories is checked separately"]
    if worst_i > tol:
        return Certificate("linear-in-x", FAIL, tols, samples,
                           witness(np.concatenate([xs, wi_z]), worst_i, hypothesis="i"), constants, flags, notes)
    if worst_ii > 0:
        return Certificate("linear-in-x", FAIL, tols, samples,
                           witness(np.concatenate([xs, wii_z]), worst_ii, hypothesis="ii"), constants, flags, notes)
    return Certificate("linear-in-x", PASS, tols, samples, constants=constants, flags=flags, notes=notes)


def instability_indicator(X: Field, equilibrium, tol_zero: float | None = None) -> Certificate:
    """Pass when some Jacobian eigenvalue has real part above the zero threshold."""
    mats = _matrices_of(X, equilibrium)
    best = -np.inf
    eigs = []
    tz = 0.0
    for J in mats:
        sp = linalg.eigenvalues(J, tol_zero)
        tz = sp.tol_zero
        eigs.append([complex(e) for e in sp.eigenvalues])
        best = max(best, float(np.max(sp.eigenvalues.real)))
    constants = {"eigenvalues": eigs, "max_real_part": best}
    if best > tz:
        return Certificate("instability", PASS, {"tol_zero": tz}, {"matrices": len(mats)}, constants=constants)
    return Certificate("instability", FAIL, {"tol_zero": tz}, {"matrices": len(mats)},
                       witness(equilibrium, tz - best, reason="no eigenvalue in the open right half-plane"),
                       constants)


def check_common_lyapunov(matrices: Sequence, Q, p: int, P=None) -> Certificate:
    """One Q block-reduces every matrix and one P is a common Lyapunov matrix for the reduced blocks."""
    mats = [np.asarray(A, dtype=float) for A in matrices]
    P = np.eye(mats[0].shape[0] - p) if P is None else np.asarray(P, dtype=float)
    rows = []
    worst_v, reason = -np.inf, ""
    for A in mats:
        bt = linalg.block_transform(Q, A, p)
        sp = linalg.eigenvalues(bt.atil)
        res = linalg.lyapunov_residual(bt.atil, P)
        rows.append({"printed": bt.printed, "atil": bt.atil, "zero_block_ok": bt.zero_block_ok,
                     "atil_eigenvalues": [complex(e) for e in sp.eigenvalues], "lyapunov_residual": res})
        for v, r in ((0.0 if bt.zero_block_ok else 1.0, "zero block"),
                     (float(np.max(sp.eigenvalues.real)), "unstable reduced block"),
                     (res, "Lyapunov inequality")):
            if v > worst_v or (not bt.zero_block_ok and r == "zero block"):
                worst_v, reason = max(v, worst_v), r
    ok = all(r["zero_block_ok"] for r in rows) and all(r["lyapunov_residual"] < 0 for r in rows) \
        and all(max(e.real for e in r["atil_eigenvalues"]) < 0 for r in rows)
    constants = {"blocks": rows}
    if ok:
        return Certificate("common-lyapunov", PASS, {"zero_block_tol": 1e-8}, {"matrices": len(mats)},
                           constants=constants)
    return Certificate("common-lyapunov", FAIL, {"zero_block_tol": 1e-8}, {"matrices": len(mats)},
                       witness(np.zeros(1), abs(worst_v), reason=reason), constants)
