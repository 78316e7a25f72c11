"""Steady solves and backward-Euler time marching of C u' + K u = q."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FactorizationFailure, SingularSystem


def _factorize(matrix, what):
    try:
        lu = spla.splu(matrix.tocsc())
    except RuntimeError as exc:
        msg = str(exc).lower()
        if "singular" in msg:
            raise SingularSystem(f"{what} is singular: {exc}") from exc
        raise FactorizationFailure(f"{what} factorization failed: {exc}") from exc
    piv = np.abs(lu.U.diagonal())
    if piv.size and (piv.min() == 0.0 or piv.min() <= 1e-13 * piv.max()):
        raise SingularSystem(f"{what} is numerically singular "
                             f"(pivot ratio {piv.min():.2e}/{piv.max():.2e})")
    return lu


def solve_steady(system, t: float = 0.0) -> np.ndarray:
    """Direct solve of K u = q(t) with one refinement pass and a residual check."""
    q = system.q(t)
    lu = _factorize(system.K, "K")
    u = lu.solve(q)
    r = q - system.K @ u
    u = u + lu.solve(r)  # one iterative-refinement step
    r = q - system.K @ u
    scale = float(np.linalg.norm(q, np.inf))
    if scale == 0:
        scale = 1.0
    rel = float(np.linalg.norm(r, np.inf)) / scale
    if not np.isfinite(rel) or rel > 1e-9:
        raise SingularSystem(f"steady residual {rel:.2e} exceeds 1e-9; "
                             "system is singular or severely ill-conditioned")
    return u


@dataclass
class TransientSolution:
    """Snapshots of a backward-Euler march; first stamp is t = 0."""

    times: np.ndarray
    U: np.ndarray          # (n_steps + 1, n_points)
    method: str
    dt: float

    def at(self, t: float) -> np.ndarray:
        """Dense output by linear interpolation between snapshots."""
        t = float(t)
        ts = self.times
        if t <= ts[0]:
            return self.U[0].copy()
        if t >= ts[-1]:
            return self.U[-1].copy()
        k = int(np.searchsorted(ts, t) - 1)
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1 - w) * self.U[k] + w * self.U[k + 1]

    def history(self, weights_row) -> np.ndarray:
        """Time series of a fixed linear functional of the solution."""
        return self.U @ np.asarray(weights_row)


def step_backward_euler(system, u_n: np.ndarray, t_n: float, dt: float,
                        _lu=None) -> np.ndarray:
    """One implicit step: (C/dt + K) u_{n+1} = C u_n / dt + q(t_n + dt)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    lu = _lu if _lu is not None else _factorize(system.C / dt + system.K,
                                                "C/dt + K")
    rhs = system.C @ u_n / dt + system.q(t_n + dt)
    return lu.solve(rhs)


def run_transient(system, u0: np.ndarray, dt: float, T: float,
                  t0: float = 0.0) -> TransientSolution:
    """March from t0 to t0 + T with fixed dt, reusing one factorization."""
    if T < dt:
        raise ValueError("T must be at least dt")
    n_steps = int(round(T / dt))
    lu = _factorize(system.C / dt + system.K, "C/dt + K")
    U = np.empty((n_steps + 1, len(u0)))
    U[0] = np.asarray(u0, dtype=float)
    times = t0 + dt * np.arange(n_steps + 1)
    for k in range(n_steps):
        U[k + 1] = step_backward_euler(system, U[k], times[k], dt, _lu=lu)
    return TransientSolution(times, U, system.method, dt)
