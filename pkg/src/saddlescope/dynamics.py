"""Vector fields: the saddle-point flow, Jacobians, and piecewise C^2 fields."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CapabilityError, DomainError, NumericError
from .functions import SaddleFunction, grad, hess_blocks

Array = np.ndarray


@dataclass(frozen=True)
class VectorField:
    dim: int
    eval: Callable[[Array], Array]
    jacobian: Optional[Callable[[Array], Array]] = None
    domain_guard: Optional[Callable[[Array], bool]] = None
    name: str = "X"

    def check(self, state) -> Array:
        s = state if type(state) is np.ndarray and state.dtype == float else np.asarray(state, dtype=float)
        if s.shape != (self.dim,):
            raise DomainError(f"{self.name}: state must have length {self.dim}, got {s.shape}")
        if self.domain_guard is not None and not self.domain_guard(s):
            raise DomainError(f"{self.name}: state {s} is outside the domain")
        return s

    def __call__(self, state) -> Array:
        return np.asarray(self.eval(self.check(state)), dtype=float)


def saddle_field(F: SaddleFunction) -> VectorField:
    """The flow x' = -grad_x F, z' = grad_z F on R^(n+m)."""
    n = F.n
    gx_fn, gz_fn = F.grad_x, F.grad_z

    def ev(s):
        x, z = s[:n], s[n:]
        # VectorField.check has already applied the domain guard
        gx = gx_fn(x, z) if gx_fn is not None else grad(F, "x", x, z)
        gz = gz_fn(x, z) if gz_fn is not None else grad(F, "z", x, z)
        out = np.concatenate([-np.asarray(gx, dtype=float), np.asarray(gz, dtype=float)])
        if not np.isfinite(out).all():
            bad = int(np.argmax(~np.isfinite(out)))
            raise NumericError(f"{F.name}: non-finite field component {bad} at {s}")
        return out

    def jac(s):
        x, z = s[:n], s[n:]
        hxx, hxz, hzz = hess_blocks(F, x, z)
        return np.block([[-hxx, -hxz], [hxz.T, hzz]])

    def guard(s):
        return F.domain_guard(s[:n], s[n:])

    return VectorField(
        n + F.m,
        ev,
        jac if F.order >= 2 else None,
        guard if F.domain_guard is not None else None,
        f"X_sp[{F.name}]",
    )


def fd_jacobian(X: VectorField, state, h: float = 1e-6) -> Array:
    s = X.check(state)
    J = np.empty((X.dim, X.dim))
    for j in range(X.dim):
        step = h * (1.0 + abs(s[j]))
        e = np.zeros(X.dim)
        e[j] = step
        J[:, j] = (np.asarray(X.eval(s + e)) - np.asarray(X.eval(s - e))) / (2 * step)
    return J


def jacobian_at(X: VectorField, state) -> Array:
    if X.jacobian is None:
        raise CapabilityError(f"{X.name} has no Jacobian provider")
    s = X.check(state)
    return np.asarray(X.jacobian(s), dtype=float)


@dataclass(frozen=True)
class Patch:
    """One patch: ``membership(s) > 0`` inside, ``field`` is a C^2 extension to all of R^dim."""

    membership: Callable[[Array], float]
    field: VectorField
    name: str = ""


@dataclass(frozen=True)
class PiecewiseField:
    dim: int
    patches: tuple[Patch, ...]
    continuity_tol: float = 1e-9
    name: str = "f"
    closure_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.patches:
            raise ValueError("a piecewise field needs at least one patch")
        for p in self.patches:
            if p.field.dim != self.dim:
                raise ValueError("patch field dimension mismatch")

    def memberships(self, state) -> Array:
        s = np.asarray(state, dtype=float)
        return np.array([float(p.membership(s)) for p in self.patches])

    def closure_patches(self, state) -> list[int]:
        m = self.memberships(state)
        return [i for i, v in enumerate(m) if v >= -self.closure_tol]

    def patch_index(self, state) -> int:
        """First patch (in order) whose closure contains ``state``."""
        idx = self.closure_patches(state)
        if not idx:
            raise DomainError(f"{self.name}: state {state} lies outside every patch closure")
        return idx[0]

    def __call__(self, state) -> Array:
        s = np.asarray(state, dtype=float)
        if s.shape != (self.dim,):
            raise DomainError(f"{self.name}: state must have length {self.dim}")
        return self.patches[self.patch_index(s)].field(s)

    def as_vector_field(self) -> VectorField:
        return VectorField(self.dim, self.__call__, None, None, self.name)


def single_patch(X: VectorField) -> PiecewiseField:
    return PiecewiseField(X.dim, (Patch(lambda s: 1.0, X, "all"),), name=X.name)


def limit_jacobians(P: PiecewiseField, state, dedup_tol: float = 1e-9) -> list[Array]:
    """Jacobians of the local fields of every patch whose closure holds ``state``."""
    s = np.asarray(state, dtype=float)
    idx = P.closure_patches(s)
    if not idx:
        raise DomainError(f"{P.name}: state {s} lies outside every patch closure")
    out: list[Array] = []
    for i in idx:
        J = jacobian_at(P.patches[i].field, s)
        if all(np.linalg.norm(J - K) > dedup_tol for K in out):
            out.append(J)
    return out


def continuity_defect(P: PiecewiseField, state) -> float:
    """Largest disagreement between local fields of the patches meeting at ``state``."""
    s = np.asarray(state, dtype=float)
    vals = [P.patches[i].field(s) for i in P.closure_patches(s)]
    if len(vals) < 2:
        return 0.0
    return max(float(np.max(np.abs(a - b))) for a in vals for b in vals)


# ---------------------------------------------------------------------------
# the two-patch linear-plus-quadratic example on R^3
# ---------------------------------------------------------------------------

PATCHY_A1 = np.array([[-1.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -1.0]])
PATCHY_A2 = np.array([[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]])
PATCHY_Q = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 0.0, -2.0]])
_ONES = np.ones(3)
_E13 = np.array([1.0, 0.0, -1.0])


def patchy_field() -> PiecewiseField:
    """f = A1 x + d^2 1 where d = x1 - x3 >= 0, else A2 x + d^2 (1 - d) 1.

    Both branches are defined on all of R^3 so limit Jacobians exist on the
    switching plane x1 = x3.
    """

    def f1(s):
        d = s[0] - s[2]
        return PATCHY_A1 @ s + d * d * _ONES

    def j1(s):
        d = s[0] - s[2]
        return PATCHY_A1 + np.outer(_ONES, 2 * d * _E13)

    def f2(s):
        d = s[0] - s[2]
        return PATCHY_A2 @ s + d * d * (1 - d) * _ONES

    def j2(s):
        d = s[0] - s[2]
        return PATCHY_A2 + np.outer(_ONES, (2 * d - 3 * d * d) * _E13)

    return PiecewiseField(
        3,
        (
            Patch(lambda s: s[0] - s[2], VectorField(3, f1, j1, None, "f1"), "x1>=x3"),
            Patch(lambda s: s[2] - s[0], VectorField(3, f2, j2, None, "f2"), "x1<x3"),
        ),
        continuity_tol=1e-9,
        name="patchy",
    )
