"""Steady solves and backward-Euler stepping."""

import numpy as np
import pytest
import scipy.sparse as sp

import fpmheat as f
from fpmheat import materials
from fpmheat.assembly import (
    DirichletBC,
    LoadAssembler,
    DiscreteSystem,
    NeumannBC,
    ProblemSpec,
    SolverConfig,
    assemble,
)
from fpmheat.errors import SingularSystem
from fpmheat.timeint import run_transient, solve_steady, step_backward_euler

UNIT = f.Box((0.0, 0.0), (1.0, 1.0))
ALL_D = ("xmin", "xmax", "ymin", "ymax")


def scalar_system(c=1.0, k=2.5, q=0.0):
    load = LoadAssembler(1)
    load.add_const(0, q)
    load.finalize()
    return DiscreteSystem(sp.csc_matrix(np.array([[c]])),
                          sp.csc_matrix(np.array([[k]])), load, "fpm", 1)


class TestSolveSteady:
    def test_constant_dirichlet(self):
        _, part = f.build_structured_partition(UNIT, 3, "quad")
        spec = ProblemSpec(part, materials.isotropic(1.0),
                           {s: DirichletBC(2.0) for s in ALL_D})
        u = solve_steady(assemble(spec, SolverConfig(method="pg2")))
        np.testing.assert_allclose(u, 2.0, atol=1e-9)

    def test_all_neumann_singular(self):
        _, part = f.build_structured_partition(UNIT, 3, "quad")
        spec = ProblemSpec(part, materials.isotropic(1.0),
                           {s: NeumannBC(0.0) for s in ALL_D})
        with pytest.raises(SingularSystem):
            solve_steady(assemble(spec, SolverConfig(method="pg2")))

    def test_residual_bound(self):
        _, part = f.build_structured_partition(UNIT, 4, "quad")
        spec = ProblemSpec(part, materials.constant(np.diag([3.0, 1.0])),
                           {s: DirichletBC(lambda xs, t: xs[:, 0] ** 2)
                            for s in ALL_D})
        sys_ = assemble(spec, SolverConfig(method="fpm"))
        u = solve_steady(sys_)
        q = sys_.q(0.0)
        rel = np.linalg.norm(q - sys_.K @ u, np.inf) / np.linalg.norm(q, np.inf)
        assert rel < 1e-9


class TestBackwardEuler:
    def test_zero_fixed_point(self):
        sys_ = scalar_system()
        u1 = step_backward_euler(sys_, np.zeros(1), 0.0, 0.1)
        assert u1[0] == 0.0

    def test_scalar_closed_form(self):
        lam, dt = 2.5, 0.2
        sys_ = scalar_system(c=1.0, k=lam)
        u1 = step_backward_euler(sys_, np.array([1.0]), 0.0, dt)
        assert u1[0] == pytest.approx(1.0 / (1.0 + lam * dt), rel=1e-14)

    def test_dt_positive_required(self):
        with pytest.raises(ValueError):
            step_backward_euler(scalar_system(), np.zeros(1), 0.0, 0.0)


class TestRunTransient:
    def steady_compatible_spec(self):
        _, part = f.build_structured_partition(UNIT, 4, "quad")
        bcs = {s: DirichletBC(lambda xs, t: 1.0 + xs[:, 0]) for s in ALL_D}
        return ProblemSpec(part, materials.isotropic(1.0), bcs)

    def test_equilibrium_preserved(self):
        spec = self.steady_compatible_spec()
        sys_ = assemble(spec, SolverConfig(method="pg2"))
        u0 = solve_steady(sys_)
        sol = run_transient(sys_, u0, dt=0.05, T=0.5)
        assert np.abs(sol.U - u0).max() < 1e-9

    def test_monotone_approach_for_any_dt(self):
        # unconditional stability: distance to the constant steady state is
        # non-increasing even for very large steps
        _, part = f.build_structured_partition(UNIT, 4, "quad")
        bcs = {s: DirichletBC(3.0) for s in ALL_D}
        spec = ProblemSpec(part, materials.isotropic(1.0), bcs)
        for dt in (0.01, 1.0, 1e3):
            sys_ = assemble(spec, SolverConfig(method="pg2", dt_hint=dt))
            sol = run_transient(sys_, np.zeros(16), dt=dt, T=5 * dt)
            dev = np.abs(sol.U - 3.0).max(axis=1)
            assert np.all(np.diff(dev) <= 1e-12)

    def test_snapshots_and_interpolation(self):
        sys_ = scalar_system(c=1.0, k=1.0)
        sol = run_transient(sys_, np.array([1.0]), dt=0.25, T=1.0)
        assert len(sol.times) == 5
        assert sol.times[0] == 0.0
        mid = sol.at(0.375)
        assert mid[0] == pytest.approx(0.5 * (sol.U[1, 0] + sol.U[2, 0]))

    def test_first_order_convergence_richardson(self):
        # halving dt halves the time-discretization error (rate ~ 1)
        dom = f.regular_polygon((0.0, 0.0), 1.0, 64)
        cloud = f.sunflower_disc_points(150)
        part = f.build_voronoi_partition(cloud, dom)

        def exact(xs, t):
            xs = np.atleast_2d(xs)
            s = xs[:, 0] + xs[:, 1]
            return np.exp(s) * np.cos(s + 4 * t)

        spec = ProblemSpec(part, materials.isotropic(1.0),
                           {"boundary": DirichletBC(exact)},
                           initial=lambda xs, t=0.0: exact(xs, 0.0))
        sys_ = assemble(spec, SolverConfig(method="pg2"))
        u0 = spec.initial_vector()
        T = 0.4
        sols = {dt: run_transient(sys_, u0, dt=dt, T=T).U[-1]
                for dt in (0.05, 0.025, 0.0125)}
        d1 = np.linalg.norm(sols[0.05] - sols[0.0125])
        d2 = np.linalg.norm(sols[0.025] - sols[0.0125])
        # order p gives d1/d2 = (4^p - 1)/(2^p - 1); p in [0.8, 1.2]
        # corresponds to ratios in [2.74, 3.30]
        assert 2.70 <= d1 / d2 <= 3.35
