"""Material fields: gradation presets, conductivity gradients, positivity."""

import numpy as np
import pytest

import fpmheat as f
from fpmheat import materials
from fpmheat.errors import NonPositiveMaterial, UnknownPreset

KHAT_ANISO = np.array([[2.0, 1.0], [1.0, 2.0]])


class TestFgPresets:
    def test_exp1_delta0_is_homogeneous(self):
        field = f.fg_preset("exp1", 0.0, np.eye(2))
        for y in (0.0, 0.37, 1.0):
            np.testing.assert_allclose(field.k((0.5, y)), np.eye(2))
            assert field.c((0.5, y)) == 1.0

    def test_exp1_value(self):
        field = f.fg_preset("exp1", 3.0, np.eye(2), L=1.0)
        assert field.c((0.0, 1.0)) == pytest.approx(np.exp(3.0))
        assert field.c((0.0, 1.0)) == pytest.approx(20.0855, rel=1e-4)

    def test_power_value(self):
        field = f.fg_preset("power", 3.0, KHAT_ANISO, L=1.0)
        np.testing.assert_allclose(field.k((0.2, 1.0)), 16.0 * KHAT_ANISO)

    def test_exp2_trig_forms(self):
        fe, _ = materials.fg_gradation("exp2", 2.0)
        ft, _ = materials.fg_gradation("trig", 2.0)
        y = 0.4
        assert fe(y) == pytest.approx((np.exp(0.8) + 5 * np.exp(-0.8)) ** 2)
        assert ft(y) == pytest.approx((np.cos(0.8) + 5 * np.sin(0.8)) ** 2)

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            f.fg_preset("cubic", 1.0, np.eye(2))

    def test_rho_is_one(self):
        field = f.fg_preset("trig", 2.0, np.eye(2))
        assert field.rho((0.3, 0.9)) == 1.0


class TestGradK:
    def build_op(self, part, sup, i):
        from fpmheat.approximation import build_gfd
        ids = sup.neighbors(i)
        return build_gfd(part.cloud.points[i], part.cloud.points[ids],
                         home_id=i, support_ids=tuple(ids))

    def test_homogeneous_gradient_zero(self):
        field = materials.constant(KHAT_ANISO)
        _, part = f.build_structured_partition(f.Box((0, 0), (1, 1)), 4, "quad")
        sup = f.compute_supports(part)
        op = self.build_op(part, sup, 5)
        gk = f.grad_k(field, op, part.cloud.points)
        np.testing.assert_allclose(gk, 0.0)

    def test_linear_f_exact_via_discrete_route(self):
        # k = (1 + y) khat has dk/dy = khat; gradient operators are exact on
        # affine fields so even the discrete route is exact
        khat = KHAT_ANISO

        def k_fn(x):
            return (1.0 + x[1]) * khat

        field = materials.MaterialField(2, k_fn, lambda x: 1.0, lambda x: 1.0,
                                        descriptor="analytic")
        _, part = f.build_structured_partition(f.Box((0, 0), (1, 1)), 4, "quad")
        sup = f.compute_supports(part)
        op = self.build_op(part, sup, 5)
        gk = f.grad_k(field, op, part.cloud.points)
        np.testing.assert_allclose(gk[0], 0.0, atol=1e-12)
        np.testing.assert_allclose(gk[1], khat, rtol=1e-10)

    def test_ex14_profile_within_2pct_of_analytic(self):
        # discrete conductivity gradient vs the analytic derivative of
        # f(y) = (exp(2y) + 5 exp(-2y))^2 at interior points of a 20x20 grid
        delta = 2.0
        fy, fpy = materials.fg_gradation("exp2", delta)

        def k_fn(x):
            return float(fy(x[1])) * np.eye(2)

        field = materials.MaterialField(2, k_fn, lambda x: 1.0, lambda x: 1.0,
                                        descriptor="analytic")
        _, part = f.build_structured_partition(f.Box((0, 0), (1, 1)), 20, "quad")
        sup = f.compute_supports(part)
        pts = part.cloud.points
        interior = [i for i in range(part.n_points)
                    if 0.1 < pts[i][0] < 0.9 and 0.1 < pts[i][1] < 0.9]
        for i in interior[::7]:
            op = self.build_op(part, sup, i)
            gk = f.grad_k(field, op, pts)
            want = float(fpy(pts[i][1]))
            assert gk[1, 0, 0] == pytest.approx(want, rel=0.02)

    def test_analytic_route_preferred(self):
        field = f.fg_preset("exp1", 3.0, np.eye(2))
        _, part = f.build_structured_partition(f.Box((0, 0), (1, 1)), 4, "quad")
        sup = f.compute_supports(part)
        op = self.build_op(part, sup, 5)
        gk = f.grad_k(field, op, part.cloud.points)
        y = part.cloud.points[5][1]
        assert gk[1, 0, 0] == pytest.approx(3 * np.exp(3 * y), rel=1e-12)


class TestPositivity:
    def test_spd_check_passes_for_trig_on_unit_interval(self):
        # the trig gradation vanishes only where tan(2y) = -1/5, outside
        # y in [0, 1] for delta = 2
        field = f.fg_preset("trig", 2.0, np.eye(2))
        ys = np.linspace(0.0, 1.0, 50)
        field.check_positive_at(np.column_stack([np.full(50, 0.5), ys]))

    def test_nonpositive_k_rejected(self):
        field = materials.constant(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(NonPositiveMaterial):
            field.check_positive_at(np.array([[0.5, 0.5]]))

    def test_piecewise_sides(self):
        field = materials.piecewise_by_region(
            lambda x: "top" if x[1] > 0.5 else "bottom",
            {"top": (2.0 * np.eye(2), 1.0, 1.0),
             "bottom": (1.0 * np.eye(2), 1.0, 1.0)})
        mid = np.array([0.5, 0.5])
        np.testing.assert_allclose(
            field.k(mid, side_anchor=np.array([0.5, 0.75])), 2.0 * np.eye(2))
        np.testing.assert_allclose(
            field.k(mid, side_anchor=np.array([0.5, 0.25])), 1.0 * np.eye(2))
