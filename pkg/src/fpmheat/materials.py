"""Position-dependent material data: k(x), rho(x), c(x).

Fields are plain callables wrapped with metadata. Conductivity gradients use
analytic derivatives when the descriptor provides them and fall back to the
point's own derivative operator otherwise. Piecewise (per-region) fields
evaluate through a side anchor so that a face on a material interface sees
each neighbour's own conductivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveMaterial, UnknownPreset


@dataclass(frozen=True)
class MaterialField:
    """Conductivity tensor, density and specific heat as functions of x.

    ``k_fn(x) -> (dim, dim)``, ``rho_fn(x) -> float``, ``c_fn(x) -> float``.
    ``grad_k_fn(x) -> (dim, dim, dim)`` with axes (derivative, row, col) is
    optional; ``region_fn(x) -> key`` marks piecewise descriptors.
    """

    dim: int
    k_fn: object
    rho_fn: object
    c_fn: object
    descriptor: str = "analytic"
    grad_k_fn: object = None
    region_fn: object = None

    def k(self, x, side_anchor=None) -> np.ndarray:
        if self.region_fn is not None and side_anchor is not None:
            return np.asarray(self.k_fn(x, self.region_fn(side_anchor)), dtype=float)
        if self.region_fn is not None:
            return np.asarray(self.k_fn(x, self.region_fn(x)), dtype=float)
        return np.asarray(self.k_fn(x), dtype=float)

    def rho(self, x, side_anchor=None) -> float:
        return float(self._scalar(self.rho_fn, x, side_anchor))

    def c(self, x, side_anchor=None) -> float:
        return float(self._scalar(self.c_fn, x, side_anchor))

    def _scalar(self, fn, x, side_anchor):
        if self.region_fn is not None:
            key = self.region_fn(side_anchor if side_anchor is not None else x)
            return fn(x, key)
        return fn(x)

    def grad_k(self, x):
        """Analytic conductivity gradient or None."""
        if self.grad_k_fn is None:
            return None
        return np.asarray(self.grad_k_fn(x), dtype=float)

    def check_positive_at(self, points):
        """Assert SPD conductivity and positive rho, c at sample points."""
        for x in points:
            kx = self.k(x)
            if not np.allclose(kx, kx.T, rtol=1e-10, atol=1e-14):
                raise NonPositiveMaterial(f"k not symmetric at {x}")
            if np.linalg.eigvalsh(kx).min() <= 0:
                raise NonPositiveMaterial(f"k not positive definite at {x}")
            if self.rho(x) <= 0 or self.c(x) <= 0:
                raise NonPositiveMaterial(f"rho or c not positive at {x}")


def constant(k, rho=1.0, c=1.0) -> MaterialField:
    """Homogeneous material; ``k`` may be a scalar or a dim x dim tensor."""
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if k.shape == (1, 1):
        raise ValueError("pass isotropic scalars via isotropic()")
    dim = k.shape[0]
    zero = np.zeros((dim, dim, dim))
    return MaterialField(dim, lambda x, _k=k: _k, lambda x: rho, lambda x: c,
                         descriptor="analytic", grad_k_fn=lambda x: zero)


def isotropic(k_scalar, rho=1.0, c=1.0, dim=2) -> MaterialField:
    return constant(float(k_scalar) * np.eye(dim), rho, c)


_PRESETS = {
    "exp1": (lambda d, y: np.exp(d * y), lambda d, y: d * np.exp(d * y)),
    "exp2": (lambda d, y: (np.exp(d * y) + 5 * np.exp(-d * y)) ** 2,
             lambda d, y: 2 * (np.exp(d * y) + 5 * np.exp(-d * y))
             * (d * np.exp(d * y) - 5 * d * np.exp(-d * y))),
    "trig": (lambda d, y: (np.cos(d * y) + 5 * np.sin(d * y)) ** 2,
             lambda d, y: 2 * (np.cos(d * y) + 5 * np.sin(d * y))
             * (-d * np.sin(d * y) + 5 * d * np.cos(d * y))),
    "power": (lambda d, y: (1 + d * y) ** 2,
              lambda d, y: 2 * d * (1 + d * y)),
}


def fg_gradation(name: str, delta: float, L: float = 1.0):
    """Gradation function f(y) and derivative f'(y) for a named preset."""
    if name not in _PRESETS:
        raise UnknownPreset(f"unknown gradation preset '{name}'")
    f_of, fp_of = _PRESETS[name]

    def f(y):
        return f_of(delta / L, np.asarray(y, dtype=float))

    def fp(y):
        return fp_of(delta / L, np.asarray(y, dtype=float))

    return f, fp


def fg_preset(name: str, delta: float, khat, L: float = 1.0) -> MaterialField:
    """Functionally graded material: rho = 1, c = f(y), k = f(y) * khat."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    khat = np.atleast_2d(np.asarray(khat, dtype=float))
    dim = khat.shape[0]
    f, fp = fg_gradation(name, delta, L)

    def k_fn(x):
        return float(f(x[1])) * khat

    def grad_k_fn(x):
        g = np.zeros((dim, dim, dim))
        g[1] = float(fp(x[1])) * khat
        return g

    return MaterialField(dim, k_fn, lambda x: 1.0, lambda x: float(f(x[1])),
                         descriptor=f"FG-{name}", grad_k_fn=grad_k_fn)


def piecewise_by_region(region_fn, table: dict, dim=2) -> MaterialField:
    """Material chosen per region key; ``table[key] = (k, rho, c)``.

    Faces on region interfaces are evaluated with each side's own material
    (the assembler passes the hosting point as the side anchor).
    """
    ks = {key: np.atleast_2d(np.asarray(k, dtype=float)) for key, (k, _, _) in table.items()}
    rhos = {key: float(r) for key, (_, r, _) in table.items()}
    cs = {key: float(c) for key, (_, _, c) in table.items()}
    zero = np.zeros((dim, dim, dim))
    return MaterialField(
        dim,
        k_fn=lambda x, key: ks[key],
        rho_fn=lambda x, key: rhos[key],
        c_fn=lambda x, key: cs[key],
        descriptor="piecewise-by-region",
        grad_k_fn=lambda x: zero,
        region_fn=region_fn,
    )


def grad_k(field: MaterialField, op, x) -> np.ndarray:
    """Conductivity gradient at the operator's home point.

    Analytic when the field provides it, otherwise componentwise application
    of the operator's gradient rows to conductivity samples on the support.

    ``x`` is the coordinate array of the whole cloud (indexed by the
    operator's support ids). Returns shape (dim, dim, dim): axis 0 is the
    derivative direction.
    """
    home = x[op.home]
    analytic = field.grad_k(home)
    if analytic is not None:
        return analytic
    dim = field.dim
    ids = list(op.support_ids)
    samples = np.empty((len(ids), dim, dim))
    for row, i in enumerate(ids):
        samples[row] = field.k(x[i])
    out = np.empty((dim, dim, dim))
    for a in range(dim):
        for b in range(dim):
            out[:, a, b] = op.B_grad @ samples[:, a, b]
    return out


def div_k(gk: np.ndarray) -> np.ndarray:
    """Divergence row of the conductivity tensor: (div k)_b = d_a k_ab."""
    return np.einsum("aab->b", gk)
