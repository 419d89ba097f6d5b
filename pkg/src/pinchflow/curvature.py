"""Speed functions of the principal curvatures and the power-law calculus.

Two families are provided, both normalised so that ``F(1, ..., 1) = n``:

* ``H``: the mean curvature ``sum(kappa)``;
* ``rootHk``: ``n * (H_k / binom(n, k)) ** (1 / k)`` with ``H_k`` the k-th
  elementary symmetric polynomial.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConeViolationError, DomainError

MEAN_H = "H"
ROOT_HK = "rootHk"


@dataclass(frozen=True)
class CurvatureFunction:
    kind: str = MEAN_H
    n: int = 2
    k: int = 1

    def __post_init__(self):
        if self.kind not in (MEAN_H, ROOT_HK):
            raise ValueError(f"unknown curvature function kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kind == ROOT_HK and not 1 <= self.k <= self.n:
            raise ValueError(f"rootHk needs 1 <= k <= n, got k={self.k}, n={self.n}")

    @classmethod
    def mean(cls, n=2):
        return cls(MEAN_H, n, 1)

    @classmethod
    def root_hk(cls, k, n=2):
        return cls(ROOT_HK, n, k)

    @property
    def has_analytic_gradient(self):
        """True when ``F^{ij} = g^{ij}`` (only for the mean curvature)."""
        return self.kind == MEAN_H or self.k == 1

    @property
    def kernel_code(self):
        """Selector understood by :mod:`pinchflow.kernels` (``n = 2`` only)."""
        if self.n != 2:
            raise ValueError("the axisymmetric kernels are specialised to n = 2")
        return 1 if self.has_analytic_gradient else self.k


def elementary_symmetric(kappa, k):
    """k-th elementary symmetric polynomial along the last axis."""
    kappa = np.asarray(kappa, dtype=float)
    # coefficients of prod(1 + kappa_i x), built up one factor at a time
    e = [np.ones(kappa.shape[:-1])] + [np.zeros(kappa.shape[:-1]) for _ in range(k)]
    for i in range(kappa.shape[-1]):
        ki = kappa[..., i]
        for j in range(k, 0, -1):
            e[j] = e[j] + ki * e[j - 1]
    return e[k]


def eval_F(f, kappa):
    """Evaluate ``f`` on curvature vectors.

    ``kappa`` has shape ``(n,)`` or ``(m, n)``; in the second case ``F`` is
    evaluated row by row and a :class:`ConeViolationError` carries the index
    of the first offending row.  The mean curvature is also accepted outside
    the positive cone as long as ``H > 0``.
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape[-1] != f.n:
        raise ValueError(f"expected {f.n} curvatures, got {kappa.shape[-1]}")
    rows = kappa.reshape(-1, f.n)
    if f.kind == MEAN_H or f.k == 1:
        vals = rows.sum(axis=1)
        bad = ~(vals > 0.0)
    else:
        bad = ~np.all(rows > 0.0, axis=1)
        hk = elementary_symmetric(rows, f.k)
        vals = f.n * np.power(np.abs(hk) / comb(f.n, f.k), 1.0 / f.k)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ConeViolationError(
            f"curvatures {rows[idx].tolist()} outside the admissible cone of {f.kind}",
            index=idx if kappa.ndim > 1 else None,
        )
    if kappa.ndim == 1:
        return float(vals[0])
    return vals.reshape(kappa.shape[:-1])


def outside_positive_cone(kappa):
    """Mask of curvature vectors with some non-positive entry."""
    return ~np.all(np.asarray(kappa) > 0.0, axis=-1)


def phi_suite(p, r):
    """``(Phi, Phi', Phi'')`` for ``Phi(r) = -r**(-p)``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise DomainError(f"Phi is defined for r > 0, got {r}")
    phi = -(r ** -p)
    d1 = p * r ** (-(p + 1.0))
    d2 = -p * (p + 1.0) * r ** (-(p + 2.0))
    if r.ndim == 0:
        return float(phi), float(d1), float(d2)
    return phi, d1, d2
