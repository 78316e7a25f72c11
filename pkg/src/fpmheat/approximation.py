"""Per-point derivative operators and the local trial-function machinery.

Each point carries a small matrix ``B`` mapping the temperature values on its
support (home point first) to derivatives at the home point:

* quadratic order: rows ``[ux, uy, uxx, uyy, uxy]`` in 2D and
  ``[ux, uy, uz, uxx, uyy, uzz, uxy, uyz, uxz]`` in 3D, built by a linearly
  complete multiquadric RBF differential-quadrature fit on coordinates scaled
  to the unit box;
* linear order: gradient rows only, built by weighted-least-squares
  generalized finite differences (or by the same RBF route on request).

The local trial function in a cell is the Taylor expansion through these
derivatives; ``shape_eval`` turns it into a row vector over support values
with the Kronecker-delta property at the home point.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateAxis, RankDeficientSupport, SingularBasis

LINEAR = "linear"
QUADRATIC = "quadratic"

#: default multiquadric shape constants (nondimensional, scaled domain)
DEFAULT_MQ_C = {2: 4.0, 3: 10.0}

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class DqOperator:
    """Derivative weights at one point: ``D u|home = B @ u[support_ids]``."""

    home: int
    support_ids: tuple          # home first, then supports
    B: np.ndarray               # (n_rows, m+1)
    scale: tuple                # (l_x, l_y[, l_z])
    order: str

    @property
    def dim(self) -> int:
        return len(self.scale)

    @property
    def B_grad(self) -> np.ndarray:
        return self.B[: self.dim]

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return self.B_grad @ u

    def derivatives(self, u: np.ndarray) -> np.ndarray:
        return self.B @ u


@dataclass(frozen=True)
class ShapeFunction:
    """Trial function of one cell, expressed over its support values."""

    home_cell: int
    home_point: int
    x0: np.ndarray
    op: DqOperator

    @property
    def support_ids(self) -> tuple:
        return self.op.support_ids


def transform_to_standard(home, support_coords):
    """Scale supports into the unit box around the home point.

    Returns (xi, scale) where ``xi`` holds the scaled coordinates of home
    (row 0, the origin) and supports, and ``scale = (l_x, l_y[, l_z])`` with
    ``l = max |x_i - x0|`` per axis.
    """
    home = np.asarray(home, dtype=float)
    sup = np.atleast_2d(np.asarray(support_coords, dtype=float))
    rel = sup - home
    scale = np.max(np.abs(rel), axis=0)
    if np.any(scale <= 0):
        ax = int(np.argmin(scale))
        raise DegenerateAxis(f"all supports share the home coordinate on axis {ax}")
    xi = np.vstack([np.zeros(home.shape), rel / scale])
    return xi, tuple(float(s) for s in scale)


# -- multiquadric helpers ----------------------------------------------------

def _mq_value(xi, center, c):
    d = xi - center
    return np.sqrt(np.sum(d * d, axis=-1) + c * c)


def _mq_derivatives_at(p, center, c, dim):
    """[value, ux, uy(, uz), uxx, uyy(, uzz), uxy(, uyz, uxz)] at point p."""
    d = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    s = float(np.sqrt(d @ d + c * c))
    grad = d / s
    hess = np.eye(dim) / s - np.outer(d, d) / s**3
    if dim == 2:
        second = [hess[0, 0], hess[1, 1], hess[0, 1]]
    else:
        second = [hess[0, 0], hess[1, 1], hess[2, 2],
                  hess[0, 1], hess[1, 2], hess[0, 2]]
    return np.array([s, *grad, *second])


def _derivative_count(dim):
    return dim + dim * (dim + 1) // 2


def _scale_diag(scale):
    l = np.asarray(scale, dtype=float)
    if len(l) == 2:
        return np.array([l[0], l[1], l[0] ** 2, l[1] ** 2, l[0] * l[1]])
    return np.array([l[0], l[1], l[2], l[0] ** 2, l[1] ** 2, l[2] ** 2,
                     l[0] * l[1], l[1] * l[2], l[0] * l[2]])


def _anchor_nodes(xi, dim):
    """Indices of dim+1 affinely independent nodes, preferring the first ones."""
    n = xi.shape[0]
    base = list(range(dim + 1))
    if n >= dim + 1:
        M = np.vstack([np.ones(dim + 1), xi[base].T])
        if abs(np.linalg.det(M)) > 1e-10:
            return base
    for combo in combinations(range(n), dim + 1):
        M = np.vstack([np.ones(dim + 1), xi[list(combo)].T])
        if abs(np.linalg.det(M)) > 1e-10:
            return list(combo)
    raise SingularBasis("no affinely independent node subset for the linear block")


def build_rbf_dq(home, support_coords, c=None, home_id=0, support_ids=None):
    """Quadratic-order operator by linearly complete MQ-RBF differential
    quadrature on the scaled support cloud.

    ``c`` is the nondimensional multiquadric constant (defaults 4 in 2D,
    10 in 3D). Raises :class:`SingularBasis` when the collocation matrix is
    not invertible to a 1e12 condition estimate.
    """
    home = np.asarray(home, dtype=float)
    dim = home.shape[0]
    if c is None:
        c = DEFAULT_MQ_C[dim]
    xi, scale = transform_to_standard(home, support_coords)
    n = xi.shape[0]          # m + 1 nodes
    n_rows = _derivative_count(dim)
    if n < n_rows + 1:
        raise SingularBasis(
            f"{n} nodes cannot determine {n_rows} derivatives; need at least "
            f"{n_rows + 1}")

    anchors = _anchor_nodes(xi, dim)
    M = np.vstack([np.ones(dim + 1), xi[anchors].T])     # (dim+1, dim+1)

    # basis values at all nodes: G[j, i] = g_j(xi_i)
    G = np.zeros((n, n))
    G[0, :] = 1.0
    G[1:dim + 1, :] = xi.T
    others = [i for i in range(n) if i not in anchors]
    if others:
        psi = np.empty((n, n))  # psi[k, i] = MQ centred at node k, value at node i
        for k in range(n):
            psi[k] = _mq_value(xi, xi[k], c)
        rhs = np.vstack([np.ones(len(others)), xi[others].T])  # (dim+1, n_oth)
        A = np.linalg.solve(M, rhs)                             # coefficients
        for col, i_node in enumerate(others):
            G[dim + 1 + col, :] = psi[i_node] - A[:, col] @ psi[anchors]

    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularBasis(f"collocation matrix condition {cond:.2e} too large")

    # derivative rows of every basis function at the origin
    R = np.zeros((n_rows, n))
    for a in range(dim):
        R[a, 1 + a] = 1.0
    if others:
        D_all = np.empty((n, n_rows))
        for k in range(n):
            D_all[k] = _mq_derivatives_at(xi[0], xi[k], c, dim)[1:]
        for col, i_node in enumerate(others):
            R[:, dim + 1 + col] = D_all[i_node] - A[:, col] @ D_all[anchors]

    B_xi = np.linalg.solve(G, R.T).T
    B = B_xi / _scale_diag(scale)[:, None]
    B[:, 0] -= B.sum(axis=1)  # enforce exact constant annihilation

    if support_ids is None:
        support_ids = tuple(range(1, n))
    return DqOperator(home=home_id, support_ids=(home_id, *support_ids),
                      B=B, scale=scale, order=QUADRATIC)


def build_gfd(home, support_coords, home_id=0, support_ids=None):
    """Linear-order gradient operator by inverse-distance-squared weighted
    least squares; exact on affine fields."""
    home = np.asarray(home, dtype=float)
    sup = np.atleast_2d(np.asarray(support_coords, dtype=float))
    dim = home.shape[0]
    m = sup.shape[0]
    if m < dim:
        raise RankDeficientSupport(f"{m} supports cannot span {dim} directions")
    d = sup - home
    r2 = np.sum(d * d, axis=1)
    if np.any(r2 <= 0):
        raise RankDeficientSupport("support coincides with the home point")
    w = 1.0 / r2
    A = (d * w[:, None]).T @ d
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise RankDeficientSupport(f"support directions are rank deficient "
                                   f"(condition {cond:.2e})")
    # gradient = A^-1 sum_j w_j d_j (u_j - u_0)
    W = np.linalg.solve(A, (d * w[:, None]).T)   # (dim, m)
    B = np.empty((dim, m + 1))
    B[:, 1:] = W
    B[:, 0] = -W.sum(axis=1)
    scale = np.max(np.abs(d), axis=0)
    if support_ids is None:
        support_ids = tuple(range(1, m + 1))
    return DqOperator(home=home_id, support_ids=(home_id, *support_ids),
                      B=B, scale=tuple(float(s) for s in scale), order=LINEAR)


# -- shape functions ---------------------------------------------------------

def _nbar(dx, order, dim):
    if order == LINEAR:
        return dx
    if dim == 2:
        return np.array([dx[0], dx[1], 0.5 * dx[0] ** 2, 0.5 * dx[1] ** 2,
                         dx[0] * dx[1]])
    return np.array([dx[0], dx[1], dx[2],
                     0.5 * dx[0] ** 2, 0.5 * dx[1] ** 2, 0.5 * dx[2] ** 2,
                     dx[0] * dx[1], dx[1] * dx[2], dx[0] * dx[2]])


def _grad_nbar(dx, order, dim):
    if order == LINEAR:
        return np.eye(dim)
    if dim == 2:
        return np.array([[1.0, 0.0, dx[0], 0.0, dx[1]],
                         [0.0, 1.0, 0.0, dx[1], dx[0]]])
    return np.array([
        [1, 0, 0, dx[0], 0, 0, dx[1], 0, dx[2]],
        [0, 1, 0, 0, dx[1], 0, dx[0], dx[2], 0],
        [0, 0, 1, 0, 0, dx[2], 0, dx[1], dx[0]],
    ], dtype=float)


def shape_eval(shape: ShapeFunction, x) -> np.ndarray:
    """Row vector N(x) with u_h(x) = N(x) @ u[support_ids]."""
    dx = np.asarray(x, dtype=float) - shape.x0
    op = shape.op
    nbar = _nbar(dx, op.order, op.dim)
    row = nbar @ op.B[: len(nbar)]
    row[0] += 1.0
    return row


def shape_grad_eval(shape: ShapeFunction, x) -> np.ndarray:
    """(dim, m+1) gradient rows of the trial function at x."""
    dx = np.asarray(x, dtype=float) - shape.x0
    op = shape.op
    gn = _grad_nbar(dx, op.order, op.dim)
    return gn @ op.B[: gn.shape[1]]
