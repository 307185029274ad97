"""Saddle functions F(x, z), their derivatives, and the built-in catalog.

Derivatives come from analytic providers when the function author supplies
them; otherwise they fall back to central finite differences. The catalog
entries all carry exact closed-form gradients and Hessians, and finite
differences serve only as a cross-check (see :func:`fd_validate`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import CapabilityError, DomainError, NumericError
from .report import FAIL, INCONCLUSIVE, PASS, Certificate, witness

Array = np.ndarray
HessBlocks = tuple  # (xx: n x n, xz: n x m, zz: m x m)

BLOCKS = ("xx", "xz", "zx", "zz")
_SMOOTHNESS_ORDER = {"C1": 1, "C2": 2, "C3": 3}


@dataclass(frozen=True)
class FiniteDiffConfig:
    """Step selection for central differences: h = step_abs + step_rel * |coord|."""

    step_abs: float = 1e-6
    step_rel: float = 1e-7

    def __post_init__(self) -> None:
        if not self.step_abs > 0:
            raise ValueError("step_abs must be positive")
        if self.step_rel < 0:
            raise ValueError("step_rel must be nonnegative")

    def step(self, coord: float) -> float:
        return self.step_abs + self.step_rel * abs(coord)

    def nested_step(self, coord: float) -> float:
        # coarser step for second differences of function values
        return math.sqrt(self.step_abs) + self.step_rel * abs(coord)


@dataclass(frozen=True)
class SaddleFunction:
    """A saddle function F: R^n x R^m -> R.

    ``hess`` returns the tuple ``(H_xx, H_xz, H_zz)`` with ``H_xz`` of shape
    (n, m), i.e. ``H_xz[i, j] = d^2 F / dx_i dz_j``; the ``zx`` block is its
    transpose. ``domain_guard(x, z)`` returns False where derivatives are
    undefined.
    """

    n: int
    m: int
    value: Callable[[Array, Array], float]
    grad_x: Optional[Callable[[Array, Array], Array]] = None
    grad_z: Optional[Callable[[Array, Array], Array]] = None
    hess: Optional[Callable[[Array, Array], HessBlocks]] = None
    smoothness: str = "C2"
    domain_guard: Optional[Callable[[Array, Array], bool]] = None
    name: str = "F"
    fd: FiniteDiffConfig = field(default_factory=FiniteDiffConfig)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError("dimensions n and m must be positive")
        if self.smoothness not in _SMOOTHNESS_ORDER:
            raise ValueError(f"smoothness must be one of {sorted(_SMOOTHNESS_ORDER)}")

    @property
    def order(self) -> int:
        return _SMOOTHNESS_ORDER[self.smoothness]

    def split(self, state) -> tuple[Array, Array]:
        s = np.asarray(state, dtype=float)
        if s.shape != (self.n + self.m,):
            raise DomainError(f"{self.name}: state must have length {self.n + self.m}")
        return s[: self.n], s[self.n :]

    def _coerce(self, x, z) -> tuple[Array, Array]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if x.shape != (self.n,) or z.shape != (self.m,):
            raise DomainError(
                f"{self.name}: expected x in R^{self.n}, z in R^{self.m}, "
                f"got shapes {x.shape}, {z.shape}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            raise DomainError(f"{self.name}: non-finite point")
        if self.domain_guard is not None and not self.domain_guard(x, z):
            raise DomainError(f"{self.name}: point ({x}, {z}) is outside the domain")
        return x, z

    def in_domain(self, x, z) -> bool:
        try:
            self._coerce(x, z)
        except DomainError:
            return False
        return True

    # -- evaluation -------------------------------------------------------

    def __call__(self, x, z) -> float:
        return eval_F(self, x, z)

    def grad(self, arg: str, x, z) -> Array:
        return grad(self, arg, x, z)

    def hess_block(self, block: str, x, z) -> Array:
        return hess_block(self, block, x, z)


def eval_F(F: SaddleFunction, x, z) -> float:
    x, z = F._coerce(x, z)
    val = float(F.value(x, z))
    if not math.isfinite(val):
        raise NumericError(f"{F.name}: non-finite value at ({x}, {z})")
    return val


def _check_finite(F: SaddleFunction, what: str, arr: Array) -> Array:
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        raise NumericError(f"{F.name}: non-finite {what} at coordinate {tuple(bad[0])}")
    return arr


def _fd_grad(F: SaddleFunction, arg: str, x: Array, z: Array) -> Array:
    base = x if arg == "x" else z
    out = np.empty(base.size)
    for j in range(base.size):
        h = F.fd.step(base[j])
        plus, minus = base.copy(), base.copy()
        plus[j] += h
        minus[j] -= h
        if arg == "x":
            fp, fm = F.value(plus, z), F.value(minus, z)
        else:
            fp, fm = F.value(x, plus), F.value(x, minus)
        out[j] = (fp - fm) / (2 * h)
    return out


def grad(F: SaddleFunction, arg: str, x, z) -> Array:
    """Gradient of F with respect to ``arg`` ('x' or 'z')."""
    if arg not in ("x", "z"):
        raise ValueError("arg must be 'x' or 'z'")
    x, z = F._coerce(x, z)
    provider = F.grad_x if arg == "x" else F.grad_z
    if provider is not None:
        g = np.asarray(provider(x, z), dtype=float).reshape(x.size if arg == "x" else z.size)
    else:
        g = _fd_grad(F, arg, x, z)
    return _check_finite(F, f"grad_{arg}", g)


def fd_grad(F: SaddleFunction, arg: str, x, z) -> Array:
    """Central finite-difference gradient, ignoring any analytic provider."""
    x, z = F._coerce(x, z)
    return _check_finite(F, f"fd grad_{arg}", _fd_grad(F, arg, x, z))


def _fd_hess_from_grads(F: SaddleFunction, x: Array, z: Array) -> HessBlocks:
    gx = lambda xx, zz: np.asarray(F.grad_x(xx, zz), dtype=float).reshape(F.n)
    gz = lambda xx, zz: np.asarray(F.grad_z(xx, zz), dtype=float).reshape(F.m)
    hxx = np.empty((F.n, F.n))
    hzx = np.empty((F.m, F.n))
    for j in range(F.n):
        h = F.fd.step(x[j])
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        hxx[:, j] = (gx(xp, z) - gx(xm, z)) / (2 * h)
        hzx[:, j] = (gz(xp, z) - gz(xm, z)) / (2 * h)
    hzz = np.empty((F.m, F.m))
    hxz = np.empty((F.n, F.m))
    for j in range(F.m):
        h = F.fd.step(z[j])
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        hzz[:, j] = (gz(x, zp) - gz(x, zm)) / (2 * h)
        hxz[:, j] = (gx(x, zp) - gx(x, zm)) / (2 * h)
    # average the two estimates of the mixed block
    hxz = 0.5 * (hxz + hzx.T)
    return 0.5 * (hxx + hxx.T), hxz, 0.5 * (hzz + hzz.T)


def _fd_hess_nested(F: SaddleFunction, x: Array, z: Array) -> HessBlocks:
    s = np.concatenate([x, z])
    d = s.size
    f = lambda v: F.value(v[: F.n], v[F.n :])
    H = np.empty((d, d))
    hs = [F.fd.nested_step(c) for c in s]
    f0 = f(s)
    for i in range(d):
        for j in range(i, d):
            if i == j:
                e = np.zeros(d)
                e[i] = hs[i]
                H[i, i] = (f(s + e) - 2 * f0 + f(s - e)) / hs[i] ** 2
            else:
                ei = np.zeros(d)
                ej = np.zeros(d)
                ei[i] = hs[i]
                ej[j] = hs[j]
                H[i, j] = H[j, i] = (
                    f(s + ei + ej) - f(s + ei - ej) - f(s - ei + ej) + f(s - ei - ej)
                ) / (4 * hs[i] * hs[j])
    n = F.n
    return H[:n, :n], H[:n, n:], H[n:, n:]


def fd_hess(F: SaddleFunction, x, z) -> HessBlocks:
    """Finite-difference Hessian blocks (xx, xz, zz).

    Uses differences of the analytic gradients when both are available,
    nested differences of the value otherwise.
    """
    x, z = F._coerce(x, z)
    if F.grad_x is not None and F.grad_z is not None:
        return _fd_hess_from_grads(F, x, z)
    return _fd_hess_nested(F, x, z)


def hess_blocks(F: SaddleFunction, x, z) -> HessBlocks:
    if F.order < 2:
        raise CapabilityError(f"{F.name} is declared {F.smoothness}; Hessian needs C2")
    x, z = F._coerce(x, z)
    if F.hess is not None:
        hxx, hxz, hzz = F.hess(x, z)
        blocks = (
            np.asarray(hxx, dtype=float).reshape(F.n, F.n),
            np.asarray(hxz, dtype=float).reshape(F.n, F.m),
            np.asarray(hzz, dtype=float).reshape(F.m, F.m),
        )
    else:
        blocks = fd_hess(F, x, z)
    for tag, b in zip(("xx", "xz", "zz"), blocks):
        _check_finite(F, f"hess_{tag}", b)
    return blocks


def hess_block(F: SaddleFunction, block: str, x, z) -> Array:
    """One second-derivative block; 'xz' has shape (n, m), 'zx' is (m, n)."""
    if block not in BLOCKS:
        raise ValueError(f"block must be one of {BLOCKS}")
    hxx, hxz, hzz = hess_blocks(F, x, z)
    return {"xx": hxx, "xz": hxz, "zx": hxz.T.copy(), "zz": hzz}[block]


def _rel_err(a: Array, b: Array) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(a)))))


def fd_validate(
    F: SaddleFunction, points: Iterable[tuple[Sequence[float], Sequence[float]]], tol: float
) -> Certificate:
    """Compare analytic derivative providers against finite differences.

    The error measure is max|analytic - fd| / max(1, max|analytic|), taken per
    derivative object at each point. Failures are reported, never raised.
    """
    worst = (-1.0, None, "")
    count = 0
    compared = set()
    for x, z in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        count += 1
        checks = []
        if F.grad_x is not None:
            checks.append(("grad_x", grad(F, "x", x, z), fd_grad(F, "x", x, z)))
        if F.grad_z is not None:
            checks.append(("grad_z", grad(F, "z", x, z), fd_grad(F, "z", x, z)))
        if F.hess is not None and F.order >= 2:
            analytic = hess_blocks(F, x, z)
            numeric = fd_hess(F, x, z)
            for tag, a, b in zip(("hess_xx", "hess_xz", "hess_zz"), analytic, numeric):
                checks.append((tag, a, b))
        for tag, a, b in checks:
            compared.add(tag)
            err = _rel_err(a, b)
            if err > worst[0]:
                worst = (err, np.concatenate([x, z]), tag)
    tolerances = {"tol": tol, "step_abs": F.fd.step_abs, "step_rel": F.fd.step_rel}
    samples = {"count": count}
    if not compared or count == 0:
        return Certificate(
            "fd_validate", INCONCLUSIVE, tolerances, samples,
            notes=["no analytic providers to compare" if not compared else "no points"],
        )
    err, point, tag = worst
    wit = witness(point, err, quantity=tag)
    constants = {"max_rel_err": err}
    if err < tol:
        return Certificate("fd_validate", PASS, tolerances, samples, wit, constants,
                           notes=[f"compared {sorted(compared)}"])
    return Certificate("fd_validate", FAIL, tolerances, samples, wit, constants,
                       notes=[f"worst mismatch in {tag}"])


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

_E12 = np.array([1.0, -1.0, 0.0])
_ONES3 = np.ones(3)
_E3 = np.array([0.0, 0.0, 1.0])
RADIUS_GUARD = 1e-9


def _norm(x) -> float:
    return math.sqrt(float(x @ x))


def _away_from_origin(x, z) -> bool:
    return _norm(x) >= RADIUS_GUARD


def lagrangian() -> SaddleFunction:
    """L(x, z) = (x1 + x2 + x3)^2 + z (x1 - x2): Lagrangian of the equality-constrained QP."""

    def value(x, z):
        return (x[0] + x[1] + x[2]) ** 2 + z[0] * (x[0] - x[1])

    def gx(x, z):
        return 2 * (x[0] + x[1] + x[2]) * _ONES3 + z[0] * _E12

    def gz(x, z):
        return np.array([x[0] - x[1]])

    def hess(x, z):
        return 2 * np.outer(_ONES3, _ONES3), _E12.reshape(3, 1), np.zeros((1, 1))

    return SaddleFunction(3, 1, value, gx, gz, hess, "C3", None, "lagrangian")


def augmented_lagrangian() -> SaddleFunction:
    """L(x, z) + (x1 - x2)^2: same saddle set, globally convex-concave, linear in z."""

    def value(x, z):
        d = x[0] - x[1]
        return (x[0] + x[1] + x[2]) ** 2 + z[0] * d + d * d

    def gx(x, z):
        d = x[0] - x[1]
        return 2 * (x[0] + x[1] + x[2]) * _ONES3 + (z[0] + 2 * d) * _E12

    def gz(x, z):
        return np.array([x[0] - x[1]])

    def hess(x, z):
        hxx = 2 * np.outer(_ONES3, _ONES3) + 2 * np.outer(_E12, _E12)
        return hxx, _E12.reshape(3, 1), np.zeros((1, 1))

    return SaddleFunction(3, 1, value, gx, gz, hess, "C3", None, "augmented_lagrangian")


def quasi() -> SaddleFunction:
    """F(x, z) = (2 - exp(-x^2)) (1 + exp(-z^2)), jointly strongly quasiconvex-quasiconcave at 0."""

    def value(x, z):
        return (2 - math.exp(-x[0] ** 2)) * (1 + math.exp(-z[0] ** 2))

    def gx(x, z):
        ex, ez = math.exp(-x[0] ** 2), math.exp(-z[0] ** 2)
        return np.array([2 * x[0] * ex * (1 + ez)])

    def gz(x, z):
        ex, ez = math.exp(-x[0] ** 2), math.exp(-z[0] ** 2)
        return np.array([-(2 - ex) * 2 * z[0] * ez])

    def hess(x, z):
        a, b = x[0], z[0]
        ex, ez = math.exp(-a * a), math.exp(-b * b)
        hxx = (2 - 4 * a * a) * ex * (1 + ez)
        hxz = -4 * a * b * ex * ez
        hzz = (2 - ex) * (4 * b * b - 2) * ez
        return np.array([[hxx]]), np.array([[hxz]]), np.array([[hzz]])

    return SaddleFunction(1, 1, value, gx, gz, hess, "C3", None, "quasi")


def ring_lagrangian() -> SaddleFunction:
    """L(x, z) = (||x|| - 1)^2 + z (x3 - 0.5) on R^3 x R; smooth away from x = 0."""

    def value(x, z):
        r = _norm(x)
        return (r - 1) ** 2 + z[0] * (x[2] - 0.5)

    def gx(x, z):
        r = _norm(x)
        return 2 * (1 - 1 / r) * x + z[0] * _E3

    def gz(x, z):
        return np.array([x[2] - 0.5])

    def hess(x, z):
        r = _norm(x)
        hxx = 2 * (1 - 1 / r) * np.eye(3) + 2 * np.outer(x, x) / r**3
        return hxx, _E3.reshape(3, 1), np.zeros((1, 1))

    return SaddleFunction(3, 1, value, gx, gz, hess, "C3", _away_from_origin, "ring_lagrangian")


def quartic_ring() -> SaddleFunction:
    """F(x, z) = (||x|| - 1)^4 - z^2 ||x||^2 on R^2 x R; saddle set is the unit circle at z = 0."""

    def value(x, z):
        r = _norm(x)
        return (r - 1) ** 4 - z[0] ** 2 * r * r

    def gx(x, z):
        r = _norm(x)
        return (4 * (r - 1) ** 3 / r - 2 * z[0] ** 2) * x

    def gz(x, z):
        return np.array([-2 * z[0] * float(x @ x)])

    def hess(x, z):
        r = _norm(x)
        u = x / r
        uu = np.outer(u, u)
        hxx = (
            4 * (r - 1) ** 3 / r * (np.eye(2) - uu)
            + 12 * (r - 1) ** 2 * uu
            - 2 * z[0] ** 2 * np.eye(2)
        )
        return hxx, (-4 * z[0] * x).reshape(2, 1), np.array([[-2 * float(x @ x)]])

    return SaddleFunction(2, 1, value, gx, gz, hess, "C3", _away_from_origin, "quartic_ring")


def xz_squared() -> SaddleFunction:
    """F(x, z) = x z^2, linear in x; saddle set is R_{<=0} x {0}."""

    def value(x, z):
        return x[0] * z[0] ** 2

    def gx(x, z):
        return np.array([z[0] ** 2])

    def gz(x, z):
        return np.array([2 * x[0] * z[0]])

    def hess(x, z):
        return np.zeros((1, 1)), np.array([[2 * z[0]]]), np.array([[2 * x[0]]])

    return SaddleFunction(1, 1, value, gx, gz, hess, "C3", None, "xz_squared")


def quadratic(a: float = 1.0, b: float = 1.0) -> SaddleFunction:
    """F(x, z) = a x^2 - b z^2, the textbook strictly convex-concave saddle."""

    return SaddleFunction(
        1, 1,
        lambda x, z: a * x[0] ** 2 - b * z[0] ** 2,
        lambda x, z: np.array([2 * a * x[0]]),
        lambda x, z: np.array([-2 * b * z[0]]),
        lambda x, z: (np.array([[2 * a]]), np.zeros((1, 1)), np.array([[-2 * b]])),
        "C3", None, "quadratic",
    )


def scaled(F: SaddleFunction, c: float) -> SaddleFunction:
    """The function c * F, with every provider scaled accordingly."""

    def hess(x, z):
        hxx, hxz, hzz = F.hess(x, z)
        return c * np.asarray(hxx), c * np.asarray(hxz), c * np.asarray(hzz)

    return SaddleFunction(
        F.n, F.m,
        lambda x, z: c * F.value(x, z),
        None if F.grad_x is None else (lambda x, z: c * np.asarray(F.grad_x(x, z))),
        None if F.grad_z is None else (lambda x, z: c * np.asarray(F.grad_z(x, z))),
        None if F.hess is None else hess,
        F.smoothness, F.domain_guard, f"{c:g}*{F.name}", F.fd,
    )


CATALOG: dict[str, Callable[[], SaddleFunction]] = {
    "lagrangian": lagrangian,
    "augmented_lagrangian": augmented_lagrangian,
    "quasi": quasi,
    "ring_lagrangian": ring_lagrangian,
    "quartic_ring": quartic_ring,
    "xz_squared": xz_squared,
}


def catalog_function(name: str) -> SaddleFunction:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown catalog function {name!r}; known: {sorted(CATALOG)}") from None
