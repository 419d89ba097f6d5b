"""Loss of convexity for ``x' = H^{-p} nu`` with ``p > 1``.

The initial surface near the origin is the Monge patch

    u(xi) = c1/24 xi1^4 + 1/2 (a2 + b2 xi1 + c2/2 xi1^2) xi2^2,
    c1 = 1/4,  c2 = 2 b2^2 / a2 + 1/4,

which is weakly convex with ``h11(0) = 0`` and ``H(0) = a2``.  At the origin
the rate of change of ``h11`` is

    p / a2^(p+2) * (a2/2 + (1 - p) b2^2),

negative as soon as ``b2^2 > a2 / (2 (p - 1))``.  This module evaluates the
rate in closed form, through the general evolution equation of the shape
operator (with derivatives from two independent backends), and by flowing
the patch numerically.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P

from .curvature import phi_suite
from .errors import ConsistencyError, SpeedDegeneracyError


@dataclass(frozen=True)
class QuarticPatch:
    a2: float = 1.0
    b2: float = 2.0

    def __post_init__(self):
        if not (self.a2 > 0 and self.b2 > 0):
            raise ValueError("a2 and b2 must be positive")

    @property
    def c1(self):
        return 0.25

    @property
    def c2(self):
        return 2.0 * self.b2 ** 2 / self.a2 + 0.25

    @property
    def coefficients(self):
        """``C[i, j]`` multiplies ``xi1**i * xi2**j``."""
        C = np.zeros((5, 3))
        C[4, 0] = self.c1 / 24.0
        C[0, 2] = 0.5 * self.a2
        C[1, 2] = 0.5 * self.b2
        C[2, 2] = 0.25 * self.c2
        return C

    def __call__(self, x1, x2):
        return P.polyval2d(x1, x2, self.coefficients)

    def derivative(self, i, j, x1=0.0, x2=0.0):
        """Exact ``d^(i+j) u / d xi1^i d xi2^j``."""
        C = P.polyder(P.polyder(self.coefficients, i, axis=0), j, axis=1) if (i or j) \
            else self.coefficients
        return P.polyval2d(x1, x2, C)

    def hessian(self, x1, x2):
        return (self.derivative(2, 0, x1, x2), self.derivative(1, 1, x1, x2),
                self.derivative(0, 2, x1, x2))


@dataclass(frozen=True)
class PatchGrid:
    """Uniform ``m x m`` nodes on ``[-L, L]^2``; ``m`` odd so the origin is a node."""

    L: float = 0.25
    m: int = 129

    def __post_init__(self):
        if self.m < 9 or self.m % 2 == 0:
            raise ValueError("m must be odd and at least 9")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def h(self):
        return 2.0 * self.L / (self.m - 1)

    @property
    def center(self):
        return (self.m - 1) // 2

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.m)

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")


def hessian_psd(patch, grid, tol=1e-14):
    """True if the Hessian of ``patch`` is positive semidefinite on every node."""
    X1, X2 = grid.mesh()
    u11, u12, u22 = patch.hessian(X1, X2)
    scale = max(1.0, float(np.max(np.abs(u22))))
    det = u11 * u22 - u12 * u12
    return bool(np.all(u11 >= -tol) and np.all(u22 >= -tol)
                and np.all(det >= -tol * scale * scale))


def psd_half_width(patch, m=201, lo=1e-4, hi=1.0, iters=50):
    """Largest ``L`` (by bisection) with a PSD Hessian on ``[-L, L]^2``."""
    if not hessian_psd(patch, PatchGrid(lo, m)):
        raise ValueError("Hessian is not positive semidefinite even near the origin")
    if hessian_psd(patch, PatchGrid(hi, m)):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if hessian_psd(patch, PatchGrid(mid, m)):
            lo = mid
        else:
            hi = mid
    return lo


def flow_grid(patch, m=129, L_max=0.25, margin=0.9):
    """Default grid for the patch flow: as wide as convexity allows."""
    return PatchGrid(min(L_max, margin * psd_half_width(patch)), m)


# ---------------------------------------------------------------------------
# closed form and evolution equation
# ---------------------------------------------------------------------------

def h11_dot_closed_form(a2, b2, p):
    """Rate of ``h11`` at the origin: ``p a2^-(p+2) (a2/2 + (1-p) b2^2)``."""
    return p * a2 ** (-(p + 2.0)) * (0.5 * a2 + (1.0 - p) * b2 * b2)


def convexity_loss_threshold(a2, p):
    """``b2`` above which the closed-form rate is negative."""
    return np.sqrt(a2 / (2.0 * (p - 1.0)))


def central_weights(deriv, accuracy=4):
    """Central finite-difference weights on offsets ``-M..M``."""
    M = (deriv + 1) // 2 - 1 + accuracy // 2
    k = np.arange(-M, M + 1, dtype=float)
    A = np.vander(k, increasing=True).T
    rhs = np.zeros(2 * M + 1)
    rhs[deriv] = factorial(deriv)
    return k.astype(int), np.linalg.solve(A, rhs)


def _fd_derivative(values, grid, i, j, stride):
    c = grid.center
    o1, w1 = central_weights(i) if i else (np.array([0]), np.array([1.0]))
    o2, w2 = central_weights(j) if j else (np.array([0]), np.array([1.0]))
    h = grid.h * stride
    sub = values[np.ix_(c + stride * o1, c + stride * o2)]
    return float(w1 @ sub @ w2) / h ** (i + j)


def _derivative_tensors(get):
    """Symmetric tensors of 2nd, 3rd and 4th derivatives at the origin."""
    D = {}
    for order in (1, 2, 3, 4):
        T = np.empty((2,) * order)
        for idx in np.ndindex(*T.shape):
            T[idx] = get(idx.count(0), idx.count(1))
        D[order] = T
    return D


def origin_derivatives(patch, grid=None, check_tol=1e-8):
    """u-derivatives at the origin from exact and finite-difference backends.

    Returns the exact tensors after checking that the 4th-order central
    differences on ``grid`` (stencils spread over the whole grid) agree to
    ``check_tol``.  A :class:`ConsistencyError` is raised above ``1e-6``.
    """
    grid = PatchGrid() if grid is None else grid
    exact = _derivative_tensors(lambda i, j: float(patch.derivative(i, j)))
    values = patch(*grid.mesh())
    stride = grid.center // 3
    fd = _derivative_tensors(lambda i, j: _fd_derivative(values, grid, i, j, stride))
    worst = max(float(np.max(np.abs(exact[o] - fd[o]) / np.maximum(1.0, np.abs(exact[o]))))
                for o in exact)
    if worst > max(check_tol, 1e-6):
        raise ConsistencyError(f"exact and finite-difference derivatives differ by {worst:.3e}")
    return exact, fd, worst


def shape_operator_derivatives(D):
    """``h_ij``, ``h_ij;k`` and ``h_ij;kl`` at a critical point of the graph."""
    u2, u3, u4 = D[2], D[3], D[4]
    h2 = (u4
          - np.einsum("ij,km,lm->ijkl", u2, u2, u2)
          - np.einsum("ki,jm,lm->ijkl", u2, u2, u2)
          - np.einsum("kj,im,lm->ijkl", u2, u2, u2))
    return u2, u3, h2


def h11_dot_numeric(patch, p, grid=None):
    """Rate of ``h11`` at the origin from the shape-operator evolution equation.

    Uses ``F = H`` (so ``F^{kl} = g^{kl} = delta`` at a critical point),
    ``K = 0`` and ``Phi = -H^{-p}``.
    """
    D, _, _ = origin_derivatives(patch, grid)
    h, h1, h2 = shape_operator_derivatives(D)
    H = float(np.trace(h))
    Phi, dPhi, ddPhi = phi_suite(p, H)
    lap_h = np.einsum("ijkk->ij", h2)
    hh = h @ h
    grad_H = np.einsum("kkj->j", h1)
    rhs = (dPhi * lap_h
           + dPhi * np.trace(hh) * h
           - (dPhi * H - Phi) * hh
           + ddPhi * np.outer(grad_H, grad_H))
    return float(rhs[0, 0])


# ---------------------------------------------------------------------------
# numerical flow of the patch
# ---------------------------------------------------------------------------

def _d1(u, h, axis):
    return np.gradient(u, h, axis=axis, edge_order=2)


def _d2(u, h, axis):
    u = np.moveaxis(u, axis, 0)
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h)
    out[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def graph_geometry(u, h):
    """``(W, H, u11)`` for a graph sampled on a uniform square grid."""
    u1, u2 = _d1(u, h, 0), _d1(u, h, 1)
    u11, u22 = _d2(u, h, 0), _d2(u, h, 1)
    u12 = _d1(u1, h, 1)
    W2 = 1.0 + u1 * u1 + u2 * u2
    W = np.sqrt(W2)
    H = ((1.0 + u2 * u2) * u11 - 2.0 * u1 * u2 * u12 + (1.0 + u1 * u1) * u22) / (W2 * W)
    return W, H, u11


@dataclass
class PatchFlowResult:
    t: np.ndarray
    h11: np.ndarray
    initial_slope: float
    closed_form: float

    @property
    def changed_sign(self):
        return bool(np.any(self.h11[1:] < 0.0))


def _series_slope(t, y, fraction=0.25):
    n = max(5, int(fraction * t.size))
    return float(np.polyfit(t[:n], y[:n], 2)[1])


def patch_flow_short_time(patch, p, grid=None, t_max=None, safety=0.2, check_psd=True):
    """Flow the patch by ``du/dt = -W H^{-p}`` and track ``h11`` at the origin.

    The graph lies below the convex region, so the outward normal points to
    negative ``xi3`` and the expanding flow lowers ``u``.  Boundary nodes are
    evolved with the same equation using one-sided stencils.  The default
    horizon keeps ``max |du| <= 0.01 a2 L^2``.
    """
    grid = flow_grid(patch) if grid is None else grid
    if check_psd and not hessian_psd(patch, grid):
        raise ValueError(f"Hessian is not positive semidefinite on [-{grid.L}, {grid.L}]^2")
    h = grid.h
    c = grid.center
    u = patch(*grid.mesh())

    def speed(u):
        W, H, u11 = graph_geometry(u, h)
        if np.any(H <= 0.0):
            i, j = np.unravel_index(np.argmin(H), H.shape)
            raise SpeedDegeneracyError(
                f"H <= 0 at xi = ({grid.x[i]:.4g}, {grid.x[j]:.4g})", index=(int(i), int(j)))
        return -W * H ** (-p), W, H, u11

    s, W, H, u11 = speed(u)
    if t_max is None:
        t_max = 0.01 * patch.a2 * grid.L ** 2 / float(np.max(np.abs(s)))
    dt0 = safety * h * h * float(np.min(H)) ** (p + 1.0) / (2.0 * p * float(np.max(W)))
    n_steps = max(20, int(np.ceil(t_max / dt0)))
    dt = t_max / n_steps
    ts = [0.0]
    hs = [u11[c, c] / W[c, c]]
    for k in range(n_steps):
        u_mid = u + 0.5 * dt * s
        s_mid = speed(u_mid)[0]
        u = u + dt * s_mid
        s, W, H, u11 = speed(u)
        ts.append((k + 1) * dt)
        hs.append(u11[c, c] / W[c, c])
    ts, hs = np.array(ts), np.array(hs)
    return PatchFlowResult(ts, hs, _series_slope(ts, hs),
                           h11_dot_closed_form(patch.a2, patch.b2, p))
