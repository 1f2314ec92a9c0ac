"""Floating-point Pfaffians and Schur's Pfaffian identity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SkewMatrix:
    """Even-dimensional real antisymmetric matrix.

    ``tol`` is the allowed asymmetry relative to the largest entry; the stored
    array is exactly skew (the symmetric part is discarded).
    """

    entries: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("skew matrix must be square")
        if a.shape[0] % 2:
            raise ValueError(f"Pfaffian needs even dimension, got {a.shape[0]}")
        scale = max(np.abs(a).max(initial=0.0), 1e-300)
        if np.abs(a + a.T).max(initial=0.0) > self.tol * scale:
            raise ValueError("matrix is not antisymmetric")
        object.__setattr__(self, "entries", 0.5 * (a - a.T))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def pfaffian(A) -> float:
    """Pfaffian by pivoted skew tridiagonalization (Parlett-Reid).

    Sign convention: Pf([[0, a], [-a, 0]]) = a.
    """
    if isinstance(A, SkewMatrix):
        a = A.entries.copy()
    else:
        a = np.array(A, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("Pfaffian needs a square matrix")
    n = a.shape[0]
    if n % 2:
        raise ValueError(f"Pfaffian needs even dimension, got {n}")
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(a[k + 1 :, k]).argmax())
        if kp != k + 1:
            # swapping index k+1 and kp flips the sign
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def schur_pfaffian_check(x) -> tuple[float, float, float]:
    """prod_{i<j} (x_j - x_i)/(x_j + x_i) against Pf((x_j - x_i)/(x_j + x_i)).

    Returns ``(lhs, rhs, rel_err)``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n % 2:
        raise ValueError("Schur Pfaffian identity needs an even number of variables")
    s = x[None, :] + x[:, None]
    if np.any(np.abs(s) < 1e-300):
        raise ValueError("x_i + x_j = 0 for some pair")
    m = (x[None, :] - x[:, None]) / s
    iu = np.triu_indices(n, 1)
    lhs = float(np.prod(m[iu]))
    rhs = pfaffian(m)
    scale = max(abs(lhs), abs(rhs))
    rel = abs(lhs - rhs) / scale if scale else 0.0
    return lhs, rhs, rel
