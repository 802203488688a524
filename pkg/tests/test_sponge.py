import numpy as np
import pytest

from spongebc.equations import apply_matrix, make_equations
from spongebc.errors import ConfigError, DomainError
from spongebc.grid import Grid1D, SpongeGeometry, build_grid
from spongebc.simulation import Simulation
from spongebc.sponge import (
    AbcMethod,
    SpongeConfig,
    apply_abc,
    gamma_a,
    gamma_b,
    phi,
    relax_matrix,
    relax_scalar,
    rm_damping_rates,
    weight_function,
)
from spongebc.timestepping import heun_step

GAMMA = 1.4
QBAR = np.array([1.0, 0.0, GAMMA / (GAMMA - 1.0)])
GEOM = SpongeGeometry(x_start=2.0, x_end=4.0)


class TestProfiles:
    def test_phi_endpoints(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        assert np.allclose(phi(x, GEOM), [0.0, 0.0, 0.5, 1.0, 1.0])

    def test_gamma_a_values(self):
        x = np.array([2.0, 3.0, 4.0])
        assert np.allclose(gamma_a(x, GEOM), [1.0, 0.5, 0.0], atol=1e-14)

    def test_gamma_a_flat_start(self):
        # vanishing slope at the sponge start
        eps = 1e-6
        g0 = gamma_a(np.array([2.0]), GEOM)[0]
        g1 = gamma_a(np.array([2.0 + eps]), GEOM)[0]
        assert abs(g1 - g0) / eps < 1e-5

    def test_gamma_b_values(self):
        x = np.array([2.0, 3.0, 4.0])
        got = gamma_b(x, GEOM, b=0.5)
        assert np.allclose(got, [1.0, 0.9296875, 0.0], atol=1e-14)

    @pytest.mark.parametrize("kind", ["A", "B"])
    def test_strictly_decreasing_inside(self, kind):
        x = np.linspace(2.0, 4.0, 200)
        g = weight_function(kind, x, GEOM)
        assert np.all(np.diff(g) < 0)
        assert g[0] == 1.0 and g[-1] == pytest.approx(0.0, abs=1e-14)

    def test_bad_b_rejected(self):
        with pytest.raises(DomainError):
            gamma_b(np.array([3.0]), GEOM, b=1.5)


class TestConfigProfiles:
    def test_damping_rises(self):
        cfg = SpongeConfig(geometry=GEOM, damping_profile="A", sigma=30.0)
        x = np.array([1.0, 2.0, 3.0, 4.0])
        d = cfg.damping_rates(x)
        assert np.allclose(d[0], 0.0)  # left-going field untouched by default
        assert np.allclose(d[2], [0.0, 0.0, 15.0, 30.0], atol=1e-13)

    def test_slowing_off_is_one(self):
        cfg = SpongeConfig(geometry=GEOM, slowing_profile=None)
        assert np.all(cfg.slowing_factor(np.linspace(0, 5, 11)) == 1.0)

    def test_slowing_on_follows_profile(self):
        cfg = SpongeConfig(geometry=GEOM, slowing_profile="A")
        x = np.array([1.0, 3.0, 4.0])
        assert np.allclose(cfg.slowing_factor(x), [1.0, 0.5, 0.0], atol=1e-14)


class TestRelaxation:
    def test_scalar_identity_and_pull(self):
        q = np.array([[2.0], [2.0], [7.0]])
        assert np.allclose(relax_scalar(q, 1.0, QBAR), q)
        assert np.allclose(relax_scalar(q, 0.0, QBAR), QBAR[:, None])
        mid = relax_scalar(q, 0.5, QBAR)
        assert np.allclose(mid[:, 0], [1.5, 1.0, 5.25])

    @pytest.mark.parametrize("kind", ["nonlinear", "linear"])
    def test_matrix_identity(self, kind):
        eq = make_equations(kind, GAMMA)
        rng = np.random.default_rng(0)
        q = QBAR[:, None] + 0.1 * rng.normal(size=(3, 20))
        out = relax_matrix(eq, q, np.ones((3, 20)), eq.far_field)
        assert np.allclose(out, q, atol=1e-13)

    @pytest.mark.parametrize("kind", ["nonlinear", "linear"])
    def test_matrix_equals_scalar_for_equal_weights(self, kind):
        eq = make_equations(kind, GAMMA)
        rng = np.random.default_rng(1)
        base = QBAR if kind == "nonlinear" else np.zeros(3)
        q = base[:, None] + 0.1 * rng.normal(size=(3, 30))
        gam = rng.uniform(0.0, 1.0, 30)
        got = relax_matrix(eq, q, np.tile(gam, (3, 1)), eq.far_field)
        want = relax_scalar(q, gam, eq.far_field)
        assert np.abs(got - want).max() < 1e-12

    def test_matrix_selectivity_linear(self):
        eq = make_equations("linear", GAMMA)
        es = eq.eigenstructure(np.zeros(3))
        r1, r3 = es.right[:, 0], es.right[:, 2]
        gammas = np.array([[1.0], [1.0], [0.0]])
        # right-going component fully removed
        out = relax_matrix(eq, r3[:, None].copy(), gammas, eq.far_field)
        assert np.abs(out).max() < 1e-13
        # left-going component untouched
        out = relax_matrix(eq, r1[:, None].copy(), gammas, eq.far_field)
        assert np.allclose(out[:, 0], r1, atol=1e-13)


class TestRmRates:
    def test_no_damping_at_weight_one(self):
        assert rm_damping_rates(1.0, 0.1, 1.4) == (0.0, 0.0)

    def test_hand_values(self):
        d_fe, d_exact = rm_damping_rates(0.5, 0.1, 1.4)
        assert d_fe == pytest.approx(0.5 / 0.14, rel=1e-12)
        assert d_exact == pytest.approx(np.log(2.0) / 0.14, rel=1e-12)

    def test_exact_rate_dominates(self):
        rng = np.random.default_rng(2)
        for gam in rng.uniform(0.01, 1.0, 50):
            d_fe, d_exact = rm_damping_rates(gam, 0.05, 1.4)
            assert d_exact >= d_fe

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            rm_damping_rates(0.0, 0.1, 1.4)
        with pytest.raises(DomainError):
            rm_damping_rates(0.5, 0.1, 0.0)


def _sim(kind, method_tag, n=10, omega=1.0, amplitude=0.4, **overrides):
    eq = make_equations(kind, GAMMA)
    wavelength = 2 * np.pi
    grid, geom = build_grid(2 * wavelength, omega, n, wavelength)
    if method_tag in ("none", "extrapolation"):
        method = AbcMethod(tag=method_tag)
    else:
        method = AbcMethod.preset(method_tag, geom, **overrides)
    return Simulation(eq, grid, geom, method, amplitude=amplitude)


class TestSourceTerms:
    def test_sdo_zero_outside_sponge(self):
        sim = _sim("nonlinear", "sdo")
        fg = sim.fg
        rng = np.random.default_rng(3)
        fg.interior[:] = QBAR[:, None] + 0.05 * rng.normal(size=fg.interior.shape)
        out = np.zeros_like(fg.interior)
        sim.hooks.add_source(fg, out)
        i0 = sim.n_comp
        assert np.all(out[:, :i0] == 0.0)
        assert np.abs(out[:, i0:]).max() > 0.0

    def test_sdo_eigenvector_selectivity(self):
        eq = make_equations("linear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 1.0, 10, wavelength)
        method = AbcMethod.preset("sdo", geom, slowing_profile=None)
        sim = Simulation(eq, grid, geom, method)
        es = eq.eigenstructure(np.zeros(3))
        r1, r3 = es.right[:, 0], es.right[:, 2]
        i0 = sim.n_comp
        centers = grid.centers()[i0:]
        d3 = method.config.damping_rates(centers)[2]

        fg = sim.fg
        fg.interior[:] = 0.0
        fg.interior[:, i0:] = 0.2 * r3[:, None]
        out = np.zeros_like(fg.interior)
        sim.hooks.add_source(fg, out)
        expected = -d3[None, :] * GAMMA * 0.2 * r3[:, None]
        assert np.abs(out[:, i0:] - expected).max() < 1e-12

        fg.interior[:, i0:] = 0.2 * r1[:, None]
        out[:] = 0.0
        sim.hooks.add_source(fg, out)
        assert np.abs(out).max() < 1e-13

    def test_ssdo_damps_all_fields(self):
        eq = make_equations("linear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 1.0, 10, wavelength)
        method = AbcMethod.preset("s-sdo", geom)
        sim = Simulation(eq, grid, geom, method)
        es = eq.eigenstructure(np.zeros(3))
        r1 = es.right[:, 0]
        i0 = sim.n_comp
        centers = grid.centers()[i0:]
        cfg = method.config
        d = cfg.sigma * (1.0 - weight_function(cfg.damping_profile, centers, geom, cfg.b))

        fg = sim.fg
        fg.interior[:] = 0.0
        fg.interior[:, i0:] = 0.2 * r1[:, None]
        out = np.zeros_like(fg.interior)
        sim.hooks.add_source(fg, out)
        expected = -d[None, :] * 0.2 * r1[:, None]
        assert np.abs(out[:, i0:] - expected).max() < 1e-13

    def test_ssdo_pointwise_ode_decay(self):
        # dq/dt = -d s (q - qbar) with the transport switched off
        eq = make_equations("linear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 1.0, 10, wavelength)
        method = AbcMethod.preset("s-sdo", geom, sigma=2.0)
        sim = Simulation(eq, grid, geom, method)
        fg = sim.fg
        fg.interior[:] = 0.3
        i0 = sim.n_comp
        centers = grid.centers()[i0:]
        cfg = method.config
        d = cfg.sigma * (1.0 - weight_function(cfg.damping_profile, centers, geom, cfg.b))

        def source_only(g):
            out = np.zeros_like(g.interior)
            sim.hooks.add_source(g, out)
            return out

        t_end, steps = 1.0, 2000
        dt = t_end / steps
        for _ in range(steps):
            heun_step(fg, source_only, lambda g: None, dt)
        expected = 0.3 * np.exp(-d * t_end)
        assert np.abs(fg.interior[:, i0:] - expected[None, :]).max() < 1e-6
        assert np.allclose(fg.interior[:, :i0], 0.3)

    def test_sdo_reduces_to_ssdo_with_equal_entries(self):
        # field matrix with equal diagonal entries is that scalar times identity
        eq = make_equations("nonlinear", GAMMA)
        rng = np.random.default_rng(5)
        q = QBAR[:, None] + 0.1 * rng.normal(size=(3, 25))
        d = rng.uniform(0.0, 3.0, 25)
        m = eq.field_matrix(q, np.tile(d, (3, 1)))
        v = rng.normal(size=(3, 25))
        assert np.abs(apply_matrix(m, v) - d[None, :] * v).max() < 1e-11


class TestNdoSource:
    def _setup(self, n=10):
        eq = make_equations("nonlinear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 1.0, n, wavelength)
        method = AbcMethod.preset("ndo", geom)
        sim = Simulation(eq, grid, geom, method)
        return eq, grid, geom, method, sim

    def test_zero_at_far_field(self):
        eq, grid, geom, method, sim = self._setup()
        out = np.zeros_like(sim.fg.interior)
        sim.hooks.add_source(sim.fg, out)
        assert np.abs(out).max() == 0.0

    def test_source_confined_to_sponge(self):
        eq, grid, geom, method, sim = self._setup()
        fg = sim.fg
        rng = np.random.default_rng(6)
        fg.interior[:] = QBAR[:, None] * (1.0 + 0.05 * rng.normal(size=fg.interior.shape))
        sim.fill_ghosts(fg)
        out = np.zeros_like(fg.interior)
        sim.hooks.add_source(fg, out)
        i0 = sim.n_comp
        assert np.all(out[:, :i0] == 0.0)
        assert np.abs(out[:, i0:]).max() > 0.0

    def test_single_jump_midpoint_rule(self):
        # plateau data with one jump inside the sponge: all slopes vanish and
        # the suffix integral reduces to the single midpoint-rule jump term
        eq, grid, geom, method, sim = self._setup()
        fg = sim.fg
        i0 = sim.n_comp
        q_lo = QBAR
        q_hi = QBAR * np.array([1.1, 1.0, 1.05])
        k = i0 + 5  # first cell of the upper plateau
        fg.interior[:, :k] = q_lo[:, None]
        fg.interior[:, k:] = q_hi[:, None]
        sim.fill_ghosts(fg)
        out = np.zeros_like(fg.interior)
        sim.hooks.add_source(fg, out)

        x_iface = grid.interfaces()[k]
        mean = 0.5 * (q_lo + q_hi)
        d3 = method.config.damping_rates(np.array([x_iface]))[2, 0]
        lam3 = float(eq.max_speed(mean[:, None])[0])
        m_hat = eq.field_matrix(mean, np.array([0.0, 0.0, d3 * lam3]))
        expected = m_hat @ (q_hi - q_lo)
        # the far-field jump at x_end vanishes only if the plateau equals qbar;
        # here it does not, so subtract that known contribution
        x_end = grid.interfaces()[-1]
        mean_end = 0.5 * (q_hi + QBAR)
        d3e = method.config.damping_rates(np.array([x_end]))[2, 0]
        lam3e = float(eq.max_speed(mean_end[:, None])[0])
        m_end = eq.field_matrix(mean_end, np.array([0.0, 0.0, d3e * lam3e]))
        end_term = m_end @ (QBAR - q_hi)

        for j in range(i0, k):
            assert np.allclose(out[:, j], expected + end_term, atol=1e-12)
        # cells past the jump only feel the far-field closure term
        for j in range(k, grid.num_cells):
            assert np.allclose(out[:, j], end_term, atol=1e-12)

    def test_requires_sponge(self):
        eq = make_equations("nonlinear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 0.0, 10, wavelength)
        with pytest.raises(ConfigError):
            AbcMethod.preset("ndo", geom)


class TestApplyAbc:
    def test_unknown_method_rejected(self):
        eq = make_equations("linear", GAMMA)
        grid = Grid1D(num_cells=10, dx=0.1)
        with pytest.raises(ConfigError):
            apply_abc(eq, grid, AbcMethod(tag="pml"))

    def test_none_is_bitwise_bare(self):
        a = _sim("nonlinear", "none", omega=0.0)
        b = _sim("nonlinear", "none", omega=0.0)
        for _ in range(20):
            a.step(np.inf)
            b.step(np.inf)
        assert np.array_equal(a.fg.interior, b.fg.interior)

    def test_rm_with_unit_weight_is_identity(self):
        # sponge placed past the domain end: the weight is 1 on every cell
        eq = make_equations("nonlinear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom_none = build_grid(2 * wavelength, 0.0, 10, wavelength)
        far = SpongeGeometry(x_start=grid.length + 1.0, x_end=grid.length + 2.0)
        bare = Simulation(eq, grid, geom_none, AbcMethod(tag="none"))
        relaxed = Simulation(eq, grid, geom_none, AbcMethod.preset("rm", far))
        # identical hook geometry: weight evaluates to 1 on all interior cells
        relaxed.hooks = apply_abc(eq, grid, AbcMethod.preset("rm", far))
        relaxed.n_comp = bare.n_comp
        for _ in range(15):
            bare.step(np.inf)
            relaxed.step(np.inf)
        assert np.array_equal(bare.fg.interior, relaxed.fg.interior)

    def test_rm_m_all_fields_matches_rm(self):
        a = _sim("linear", "rm")
        b = _sim("linear", "rm-m", relax_fields=(True, True, True))
        for _ in range(60):
            a.step(np.inf)
            b.step(np.inf)
        assert np.abs(a.fg.interior - b.fg.interior).max() < 1e-12

    def test_exactly_one_hook_channel(self):
        eq = make_equations("nonlinear", GAMMA)
        wavelength = 2 * np.pi
        grid, geom = build_grid(2 * wavelength, 1.0, 10, wavelength)
        expectations = {
            "rm": ("post_step",),
            "rm-m": ("post_step",),
            "rm2": ("pre_step", "post_step"),
            "rm-m2": ("pre_step", "post_step"),
            "rm-rk": ("stage_hook",),
            "rm-m-rk": ("stage_hook",),
            "sdo": ("speed_scale", "add_source"),
            "s-sdo": ("add_source",),
            "ndo": ("add_source",),
        }
        for tag, active in expectations.items():
            hooks = apply_abc(eq, grid, AbcMethod.preset(tag, geom))
            for channel in ("speed_scale", "add_source", "post_step", "stage_hook", "pre_step"):
                value = getattr(hooks, channel)
                if channel in active:
                    assert value is not None, (tag, channel)
                else:
                    assert value is None, (tag, channel)


class TestStrangEquivalence:
    def test_strang_matches_lie_trotter_squared_weight(self):
        # linear system: the Strang sandwich with weight G equals the plain
        # post-step relaxation with weight G^2, on the computational domain
        sim_strang = _sim("linear", "rm2")
        sim_lt = _sim("linear", "rm")

        # replace the Lie-Trotter weight by its square
        eq = sim_lt.eq
        grid, geom = sim_lt.grid, sim_lt.geometry
        i0 = sim_lt.n_comp
        gam = sim_lt.method.config.weight(grid.centers()[i0:]) ** 2

        def relax_sq(fg):
            sl = fg.interior[:, i0:]
            sl[:] = relax_scalar(sl, gam, eq.far_field)

        sim_lt.hooks.post_step = relax_sq

        t = 0.0
        for _ in range(80):
            t += 0.1
            while sim_strang.fg.t < t - 1e-12:
                sim_strang.step(t)
            while sim_lt.fg.t < t - 1e-12:
                sim_lt.step(t)
        diff = np.abs(sim_strang.fg.interior[:, :i0] - sim_lt.fg.interior[:, :i0]).max()
        assert diff < 1e-12

    def test_strang_with_identity_hyperbolic_step_squares_weight(self):
        sim = _sim("linear", "rm2")
        i0 = sim.n_comp
        gam = sim.method.config.weight(sim.grid.centers()[i0:])
        fg = sim.fg
        rng = np.random.default_rng(4)
        fg.interior[:] = rng.normal(size=fg.interior.shape)
        before = fg.interior[:, i0:].copy()
        sim.hooks.pre_step(fg)
        sim.hooks.post_step(fg)
        expected = relax_scalar(before, gam**2, sim.eq.far_field)
        assert np.abs(fg.interior[:, i0:] - expected).max() < 1e-14


class TestPresets:
    def test_defaults(self):
        geom = GEOM
        sdo = AbcMethod.preset("sdo", geom)
        assert sdo.config.damping_profile == "A"
        assert sdo.config.slowing_profile == "B"
        assert sdo.config.sigma == 30.0
        assert sdo.config.damp_fields == (False, False, True)
        ndo = AbcMethod.preset("ndo", geom)
        assert ndo.config.damping_profile == "B"
        assert ndo.config.sigma == 20.0
        rm = AbcMethod.preset("rm", geom)
        assert rm.config.weight_profile == "B"
        assert rm.config.b == 0.5
        assert rm.config.relax_fields == (True, True, True)
        rm_m = AbcMethod.preset("rm-m", geom)
        assert rm_m.config.relax_fields == (False, False, True)

    def test_zero_width_rejected(self):
        geom = SpongeGeometry(x_start=2.0, x_end=2.0)
        for tag in ("rm", "rm-m", "sdo", "s-sdo", "ndo"):
            with pytest.raises(ConfigError):
                AbcMethod.preset(tag, geom)

    def test_unknown_tag_rejected(self):
        with pytest.raises(ConfigError):
            AbcMethod.preset("pml", GEOM)
