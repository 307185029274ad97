"""Small dense matrix analysis.

Eigenvalues are computed here by Householder reduction to Hessenberg form
followed by shifted QR sweeps (Givens rotations, Wilkinson shift, complex
arithmetic); singular values for rank decisions come from numpy's SVD.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NumericError

MAX_DIM = 16
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # complex, sorted by descending real part
    zero_multiplicity: int
    max_real_part_nonzero: float  # -inf when every eigenvalue is (numerically) zero
    tol_zero: float

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[np.abs(self.eigenvalues) >= self.tol_zero]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.eigenvalues.imag == 0.0))

    def real_values(self) -> np.ndarray:
        return self.eigenvalues.real.copy()


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError("matrix has non-finite entries")
    return A


def hessenberg(A) -> np.ndarray:
    """Upper Hessenberg matrix similar to ``A`` (Householder reflections)."""
    H = _as_square(A).copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0]) if x[0] != 0 else alpha
        v /= np.linalg.norm(v)
        H[k + 1 :, :] -= 2.0 * np.outer(v, v @ H[k + 1 :, :])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _wilkinson(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def _qr_eigs(H: np.ndarray, max_iter: int) -> np.ndarray:
    H = H.astype(complex)
    n = H.shape[0]
    anorm = max(float(np.max(np.abs(H))), np.finfo(float).tiny)
    eigs = np.empty(n, dtype=complex)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        # locate the start of the unreduced block ending at hi
        l = hi
        while l > 0:
            scale = abs(H[l, l]) + abs(H[l - 1, l - 1])
            if scale == 0.0:
                scale = anorm
            if abs(H[l, l - 1]) <= _EPS * scale:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eigs[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if total >= max_iter:
            raise NumericError(f"QR iteration did not converge after {max_iter} sweeps")
        its += 1
        total += 1
        if its % 11 == 0:
            # exceptional shift to break cycles
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            mu = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        B = H[l : hi + 1, l : hi + 1]
        k_dim = B.shape[0]
        B -= mu * np.eye(k_dim)
        rots = []
        for k in range(k_dim - 1):
            a, b = B[k, k], B[k + 1, k]
            r = np.hypot(abs(a), abs(b))
            if r == 0.0:
                G = np.eye(2, dtype=complex)
            else:
                G = np.array([[np.conj(a) / r, np.conj(b) / r], [-b / r, a / r]])
            B[k : k + 2, k:] = G @ B[k : k + 2, k:]
            rots.append(G)
        for k, G in enumerate(rots):
            top = min(k + 2, k_dim - 1) + 1
            B[:top, k : k + 2] = B[:top, k : k + 2] @ G.conj().T
        B += mu * np.eye(k_dim)
        H[l : hi + 1, l : hi + 1] = B
    return eigs


def _pair_conjugates(eigs: np.ndarray, scale: float) -> np.ndarray:
    eigs = eigs.copy()
    tiny = 1e-13 * scale
    eigs.imag[np.abs(eigs.imag) <= tiny] = 0.0
    used = np.zeros(eigs.size, dtype=bool)
    for i in range(eigs.size):
        if used[i] or eigs[i].imag == 0.0:
            continue
        cand = [j for j in range(eigs.size) if j != i and not used[j] and eigs[j].imag * eigs[i].imag < 0]
        if not cand:
            continue
        j = min(cand, key=lambda j: abs(eigs[j] - np.conj(eigs[i])))
        mean = 0.5 * (eigs[i] + np.conj(eigs[j]))
        eigs[i], eigs[j] = mean, np.conj(mean)
        used[i] = used[j] = True
    return eigs


def default_tol_zero(eigs: np.ndarray) -> float:
    rho = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return 1e-7 * (1.0 + rho)


def eigenvalues(A, tol_zero: float | None = None) -> Spectrum:
    """All eigenvalues of a real square matrix of dimension <= 16."""
    A = _as_square(A)
    n = A.shape[0]
    if n > MAX_DIM:
        raise ContractError(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    if n == 0:
        return Spectrum(np.empty(0, dtype=complex), 0, float("-inf"), tol_zero or 1e-7)
    eigs = _qr_eigs(hessenberg(A), max_iter=60 * n)
    scale = max(1.0, float(np.max(np.abs(A))))
    eigs = _pair_conjugates(eigs, scale)
    order = np.lexsort((-eigs.imag, -eigs.real))
    eigs = eigs[order]
    if tol_zero is None:
        tol_zero = default_tol_zero(eigs)
    zero = np.abs(eigs) < tol_zero
    rest = eigs[~zero]
    max_re = float(np.max(rest.real)) if rest.size else float("-inf")
    return Spectrum(eigs, int(np.count_nonzero(zero)), max_re, float(tol_zero))


def numerical_rank(A, tol: float) -> int:
    s = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    return int(np.count_nonzero(s > tol))


def zero_is_semisimple(A, spectrum: Spectrum | None = None) -> bool:
    """Geometric multiplicity of 0 (via rank) equals its algebraic multiplicity."""
    A = _as_square(A)
    spectrum = spectrum or eigenvalues(A)
    deficiency = A.shape[0] - numerical_rank(A, spectrum.tol_zero)
    return deficiency == spectrum.zero_multiplicity


def _check_symmetric(S, tol: float = 1e-9) -> np.ndarray:
    S = _as_square(S)
    if np.max(np.abs(S - S.T), initial=0.0) > tol * max(1.0, float(np.max(np.abs(S), initial=0.0))):
        raise ContractError("matrix is not symmetric")
    return 0.5 * (S + S.T)


def symmetric_eigenvalues(S) -> np.ndarray:
    """Real eigenvalues of a symmetric matrix, ascending."""
    S = _check_symmetric(S)
    return np.sort(eigenvalues(S).eigenvalues.real)


def classify(S, tol: float = 1e-9) -> tuple[str, bool]:
    """Definiteness tag plus a flag telling whether a (numerically) zero eigenvalue occurs.

    A matrix whose eigenvalues are all within ``tol`` of zero is reported as
    'PSD' with the zero flag set (it is equally NSD).
    """
    lam = symmetric_eigenvalues(S)
    if lam.size == 0:
        return "PSD", True
    has_zero = bool(np.any(np.abs(lam) <= tol))
    if np.all(lam > tol):
        return "PD", False
    if np.all(lam < -tol):
        return "ND", False
    if np.all(lam >= -tol):
        return "PSD", has_zero
    if np.all(lam <= tol):
        return "NSD", has_zero
    return "indefinite", has_zero


def definiteness(S, tol: float = 1e-9) -> str:
    return classify(S, tol)[0]


def is_psd(S, tol: float = 1e-9) -> bool:
    return bool(symmetric_eigenvalues(S)[0] >= -tol) if np.size(S) else True


def is_nsd(S, tol: float = 1e-9) -> bool:
    return bool(symmetric_eigenvalues(S)[-1] <= tol) if np.size(S) else True


def lyapunov_residual(Atil, P) -> float:
    """Largest eigenvalue of Atil^T P + P Atil; negative certifies the strict inequality."""
    Atil = _as_square(Atil)
    P = _check_symmetric(P)
    if Atil.shape != P.shape:
        raise ContractError(f"shape mismatch {Atil.shape} vs {P.shape}")
    if definiteness(P, tol=0.0) != "PD":
        raise ContractError("P must be positive definite")
    M = Atil.T @ P + P @ Atil
    return float(symmetric_eigenvalues(0.5 * (M + M.T))[-1])


@dataclass(frozen=True)
class BlockTransform:
    printed: np.ndarray  # Q^T A Q with Q exactly as given
    normalized: np.ndarray  # Qhat^T A Qhat, Qhat = Q with unit columns
    zero_block_ok: bool
    atil: np.ndarray  # lower-right block of ``normalized``
    atil_printed: np.ndarray  # lower-right block of ``printed``


def block_transform(Q, A, p: int, tol: float = 1e-8) -> BlockTransform:
    """Congruence Q^T A Q and its column-normalized similarity counterpart."""
    Q = _as_square(Q)
    A = _as_square(A)
    if Q.shape != A.shape:
        raise ContractError(f"shape mismatch {Q.shape} vs {A.shape}")
    if not 0 <= p <= A.shape[0]:
        raise ContractError("p must lie in [0, dim]")
    gram = Q.T @ Q
    diag = np.diag(gram).copy()
    if np.any(diag <= 0):
        raise ContractError("Q has a zero column")
    off = gram - np.diag(diag)
    if np.max(np.abs(off), initial=0.0) > tol * max(1.0, float(np.max(diag))):
        raise ContractError("columns of Q are not orthogonal")
    Qhat = Q / np.sqrt(diag)
    printed = Q.T @ A @ Q
    normalized = Qhat.T @ A @ Qhat

    def zero_block(M):
        return bool(
            np.max(np.abs(M[:p, :]), initial=0.0) < tol
            and np.max(np.abs(M[:, :p]), initial=0.0) < tol
        )

    ok = zero_block(printed) and zero_block(normalized)
    return BlockTransform(printed, normalized, ok, normalized[p:, p:].copy(), printed[p:, p:].copy())


def range_null_intersection(B, A, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (as columns) of range(B) intersected with null(A).

    An (n, 0) result means the intersection is {0}.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    A = _as_square(A)
    n = A.shape[0]
    if B.shape[0] != n:
        raise ContractError(f"B has {B.shape[0]} rows, A is {n}x{n}")
    if B.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    r = int(np.count_nonzero(s > tol * max(1.0, float(s[0]) if s.size else 0.0)))
    if r == 0:
        return np.zeros((n, 0))
    U = U[:, :r]
    AU = A @ U
    _, s2, Vt = np.linalg.svd(AU)
    s2_full = np.zeros(r)
    s2_full[: s2.size] = s2
    a_scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    null_mask = s2_full <= tol * a_scale
    if not np.any(null_mask):
        return np.zeros((n, 0))
    N = Vt.T[:, null_mask]
    basis, _ = np.linalg.qr(U @ N)
    return basis
