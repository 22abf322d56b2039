import numpy as np
import pytest

from polarmin import models
from polarmin.energy import (CouplingG, EnergyModel, IntegrandJ, KernelV,
                             LocalTermF, check_assumptions, eval_E1, eval_E2,
                             eval_E3, eval_total, nonlocal_quadratic,
                             origin_value, sample_kernel)
from polarmin.grid import MultiField, ScalarField, lp_norm, make_grid

# cell average of 1/|x| over [-h/2, h/2]^3 equals this constant divided by h
# (frozen from the 16-point midpoint rule; scale-invariant in h)
COULOMB_CELL_CONSTANT = 2.378989717815892

J_DIRICHLET = IntegrandJ(j=lambda s, b: b**2,
                         dj_ds=lambda s, b: np.zeros_like(np.asarray(s, float)),
                         dj_db=lambda s, b: 2.0 * b)


def e1_only_model(p=2.0):
    return EnergyModel(p=p, p_star=2 * p, js=[J_DIRICHLET])


class TestE1:
    def test_constant_field_zero(self):
        spec = make_grid(2, 9, 2.0)
        U = MultiField([ScalarField(spec, np.full(spec.shape, 4.2))])
        assert eval_E1(U, e1_only_model()) == 0.0

    def test_linear_1d_hand_sum(self):
        spec = make_grid(1, 5, 2.0)
        U = MultiField([ScalarField(spec, spec.axis_coords + 2.0)])
        # derivative is exactly 1 at every point (one-sided faces included)
        assert eval_E1(U, e1_only_model()) == pytest.approx(5.0, rel=1e-15)

    def test_component_count_checked(self):
        spec = make_grid(1, 5, 2.0)
        U = MultiField([ScalarField(spec, np.zeros(5))] * 2)
        with pytest.raises(ValueError, match="component count"):
            eval_E1(U, e1_only_model())


class TestE2:
    def test_no_local_term(self):
        spec = make_grid(1, 5, 2.0)
        U = MultiField([ScalarField(spec, np.ones(5))])
        assert eval_E2(U, e1_only_model()) == 0.0

    def test_power_local_term_matches_norm(self):
        spec = make_grid(1, 9, 3.0)
        rng = np.random.default_rng(0)
        u = ScalarField(spec, rng.random(9))
        p = 2.0
        F = LocalTermF(f=lambda r, s: s[0] ** p,
                       df_ds=lambda r, s: [p * s[0] ** (p - 1)],
                       growth_K=1.0, exponents_l=(0.5,))
        model = EnergyModel(p=p, p_star=4.0, js=[J_DIRICHLET], F=F)
        assert eval_E2(MultiField([u]), model) == pytest.approx(
            -lp_norm(u, p) ** p, rel=1e-13)

    def test_weighted_local_term_hand_sum(self):
        spec = make_grid(1, 5, 2.0)
        u = ScalarField(spec, [0.0, 2.0, 1.0, 0.5, 0.0])
        F = LocalTermF(f=lambda r, s: np.exp(-r) * s[0],
                       df_ds=lambda r, s: [np.exp(-r)],
                       growth_K=1.0, exponents_l=(0.5,))
        model = EnergyModel(p=2.0, p_star=4.0, js=[J_DIRICHLET], F=F)
        expected = -sum(np.exp(-abs(x)) * v
                        for x, v in zip(spec.axis_coords, u.values))
        assert eval_E2(MultiField([u]), model) == pytest.approx(
            expected, rel=1e-14)


class TestKernel:
    def test_constant_kernel(self):
        spec = make_grid(2, 5, 1.0)
        V = KernelV(v=lambda r: np.ones_like(r), q=3.0,
                    origin_rule=("explicit", 1.0))
        k = sample_kernel(V, spec)
        assert k.spec.points_per_axis == 9
        assert np.all(k.values == 1.0)

    def test_coulomb_origin_cell_average(self):
        for n, L in ((5, 2.0), (9, 2.0)):
            spec = make_grid(3, n, L)
            V = KernelV(v=lambda r: 1.0 / r, q=3.0)
            assert origin_value(V, spec) == pytest.approx(
                COULOMB_CELL_CONSTANT / spec.h, rel=1e-12)

    def test_origin_rules(self):
        spec = make_grid(3, 5, 2.0)
        V = KernelV(v=lambda r: 1.0 / r, q=3.0, origin_rule="zero")
        assert origin_value(V, spec) == 0.0
        V = KernelV(v=lambda r: 1.0 / r, q=3.0, origin_rule=("explicit", 7.0))
        assert origin_value(V, spec) == 7.0
        V = KernelV(v=lambda r: 1.0 / r, q=3.0, origin_rule="median")
        with pytest.raises(ValueError, match="unknown origin rule"):
            origin_value(V, spec)

    def test_sampled_coulomb_non_increasing_in_radius(self):
        spec = make_grid(3, 5, 2.0)
        V = KernelV(v=lambda r: 1.0 / r, q=3.0)
        k = sample_kernel(V, spec)
        r = k.spec.radii.ravel()
        v = k.values.ravel()
        order = np.argsort(r)
        assert np.all(np.diff(v[order]) <= 1e-12)


class TestNonlocal:
    def test_fft_matches_direct_small(self):
        spec = make_grid(3, 7, 2.0)
        model = models.choquard(m=1, dim=3)
        rng = np.random.default_rng(4)
        U = MultiField([ScalarField(spec, rng.random(spec.shape))])
        qf = nonlocal_quadratic(U, model, "fft")
        qd = nonlocal_quadratic(U, model, "direct")
        assert qf == pytest.approx(qd, rel=1e-12)

    def test_point_mass_hand_value(self):
        spec = make_grid(3, 5, 2.0)
        vals = np.zeros(spec.shape)
        vals[2, 2, 2] = 1.0
        U = MultiField([ScalarField(spec, vals)])
        model = models.choquard(m=1, dim=3)
        v0 = COULOMB_CELL_CONSTANT / spec.h
        assert eval_E3(U, model) == pytest.approx(
            -v0 * spec.cell_volume**2, rel=1e-12)

    def test_unknown_method(self):
        spec = make_grid(3, 5, 2.0)
        U = MultiField([ScalarField(spec, np.zeros(spec.shape))])
        with pytest.raises(ValueError, match="unknown method"):
            nonlocal_quadratic(U, models.choquard(), "spectral")

    def test_no_coupling_is_zero(self):
        spec = make_grid(1, 5, 2.0)
        U = MultiField([ScalarField(spec, np.ones(5))])
        assert eval_E3(U, e1_only_model()) == 0.0


class TestEvalTotal:
    def test_e1_only(self):
        spec = make_grid(1, 9, 2.0)
        rng = np.random.default_rng(1)
        U = MultiField([ScalarField(spec, rng.random(9))])
        bk = eval_total(U, e1_only_model())
        assert bk.E2 == 0.0 and bk.E3 == 0.0
        assert bk.total == bk.E1

    def test_additivity_on_example_model(self):
        spec = make_grid(3, 7, 2.0)
        model = models.example_paper(m=2, dim=3)
        rng = np.random.default_rng(2)
        U = MultiField([ScalarField(spec, rng.random(spec.shape))
                        for _ in range(2)])
        bk = eval_total(U, model)
        assert bk.total == pytest.approx(
            eval_E1(U, model) + eval_E2(U, model) + eval_E3(U, model),
            rel=1e-13)

    def test_non_finite_integrand_reported(self):
        spec = make_grid(1, 5, 2.0)
        bad = EnergyModel(p=2.0, p_star=4.0, js=[IntegrandJ(
            j=lambda s, b: np.log(s), dj_ds=None, dj_db=None)])
        U = MultiField([ScalarField(spec, np.zeros(5))])
        with pytest.raises(ValueError, match="non-finite"):
            eval_E1(U, bad)


class TestModelValidation:
    def test_p_star_must_exceed_p(self):
        with pytest.raises(ValueError, match="p\\*"):
            EnergyModel(p=2.0, p_star=2.0, js=[J_DIRICHLET])

    def test_g_and_v_must_pair(self):
        G = CouplingG(g=lambda s: s[0] ** 2, dg_ds=lambda s: [2 * s[0]],
                      growth_K=1.0, exponents_mu=(2.0,))
        with pytest.raises(ValueError, match="configured together"):
            EnergyModel(p=2.0, p_star=4.0, js=[J_DIRICHLET], G=G)

    def test_catalogue_lookup(self):
        assert models.by_name("plaplace", m=2).m == 2
        with pytest.raises(KeyError):
            models.by_name("does_not_exist")


class TestAssumptions:
    def test_example_model_passes(self):
        rep = check_assumptions(models.example_paper(m=2, dim=3), 300, 11)
        assert rep.passed, rep.failures()

    def test_negative_control_nonmonotone_g(self):
        rep = check_assumptions(models.nonmonotone_g(dim=3), 300, 11)
        names = {c.name for c in rep.failures()}
        assert "G4" in names
        for c in rep.failures():
            assert c.witness is not None

    def test_negative_control_nonsupermodular_f(self):
        rep = check_assumptions(models.nonsupermodular_f(dim=3), 300, 11)
        names = {c.name for c in rep.failures()}
        assert "F1" in names and "F3" in names

    def test_deterministic_by_seed(self):
        a = check_assumptions(models.nonmonotone_g(dim=3), 200, 3)
        b = check_assumptions(models.nonmonotone_g(dim=3), 200, 3)
        assert [(c.name, c.passed, repr(c.witness)) for c in a.checks] == \
               [(c.name, c.passed, repr(c.witness)) for c in b.checks]

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            check_assumptions(models.plaplace(), 0, 0)
