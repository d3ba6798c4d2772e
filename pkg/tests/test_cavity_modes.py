import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plasmadce.cavity_modes import (
    Constant,
    CouplingSchedule,
    Formulation,
    FormulationError,
    ModelValidityWarning,
    RaisedCosine,
    SingularPermittivityError,
    SlabCavityConfig,
    check_frequency_shift,
    coupling_schedule,
    default_schedule,
    dispersion_check,
    plasma_displacements,
    plasma_displacements_quadrature,
    pulsed_surface_density,
    to_instantaneous,
)

OMEGA = 2.0 * math.pi  # drive frequency for the unit cavity (omega0 = pi)
T_PEAK = 0.5  # pi / OMEGA: maximum of the raised-cosine density


class StepPermittivity:
    """eps1(t) = before at t = 0, after for t > 0."""

    def __init__(self, before, after):
        self.before, self.after = before, after

    def __call__(self, t):
        return np.where(np.asarray(t) > 0, self.after, self.before)


def unit_cavity(**overrides):
    """L = 1, k = pi, slab at the antinode, laser density peaking at 1."""
    kw = dict(
        slab_position=0.5,
        slab_thickness=1e-3,
        epsilon0=1.0,
        epsilon1=Constant(4.0),
        surface_density=pulsed_surface_density(1.0, OMEGA),
        e2_over_m=1.0,
    )
    kw.update(overrides)
    return SlabCavityConfig.standing_wave(1, 1.0, **kw)


class TestSlabCavityConfig:
    def test_omega0_from_dispersion(self):
        cfg = unit_cavity(k_perp=1.0, epsilon0=2.0)
        assert cfg.omega0 == pytest.approx(math.sqrt((math.pi**2 + 1.0) / 2.0))

    @pytest.mark.parametrize(
        "overrides",
        [
            dict(slab_thickness=0.0),
            dict(slab_thickness=1.5),
            dict(slab_position=0.9995),
            dict(slab_position=-0.1),
            dict(epsilon0=0.0),
            dict(epsilon1=Constant(-1.0)),
            dict(surface_density=Constant(1.0)),
        ],
    )
    def test_invalid_configuration_rejected(self, overrides):
        with pytest.raises(ValueError):
            unit_cavity(**overrides)

    def test_wall_slab_uses_thickness_weight(self):
        cfg = unit_cavity(slab_position=0.0, slab_thickness=0.01)
        assert cfg.mode_weight == pytest.approx((math.pi * 0.01) ** 2 / 3.0)

    def test_plasma_mass_vanishes_at_start(self):
        assert unit_cavity().plasma_mass_sq(0.0) == 0.0


class TestPlasmaDisplacements:
    def test_node_kills_both(self):
        # second mode has a node at the cavity centre
        cfg = SlabCavityConfig.standing_wave(
            2, 1.0, slab_position=0.5, slab_thickness=1e-3, epsilon0=1.0,
            epsilon1=StepPermittivity(4.0, 8.0), surface_density=pulsed_surface_density(1.0, OMEGA),
            e2_over_m=1.0,
        )
        d_eps, d_m = plasma_displacements(cfg, 0.3)
        assert abs(d_eps) < 1e-30 and abs(d_m) < 1e-30

    def test_conductivity_reaches_tenth_of_length(self):
        # n_s e^2/(m eps0) L = 1, omega0 L = pi, sin^2 k l = 1
        d_eps, d_m = plasma_displacements(unit_cavity(epsilon1=Constant(4.0)), T_PEAK)
        assert d_eps == 0.0
        assert d_m == pytest.approx(1.0 / math.pi**2, rel=1e-12)

    def test_permittivity_step(self):
        cfg = unit_cavity(epsilon0=1.0, epsilon1=StepPermittivity(10.0, 20.0), surface_density=Constant(0.0))
        d_eps, d_m = plasma_displacements(cfg, 1.0)
        assert d_eps / cfg.slab_thickness == pytest.approx(-5.0, rel=1e-12)
        assert d_m == 0.0

    def test_quadrature_cross_check(self):
        # frozen oracle: exact t = 0 mode function integrated over a thin slab
        cfg = unit_cavity(slab_thickness=1e-4, epsilon1=StepPermittivity(10.0, 20.0), surface_density=Constant(0.0))
        d_eps, _ = plasma_displacements_quadrature(cfg, 1.0)
        assert d_eps / cfg.slab_thickness == pytest.approx(-5.0, rel=1e-2)

    def test_quadrature_matches_thin_slab_for_conductivity(self):
        cfg = unit_cavity(slab_thickness=1e-4, epsilon1=Constant(1.0))
        _, d_m_quad = plasma_displacements_quadrature(cfg, T_PEAK)
        _, d_m = plasma_displacements(cfg, T_PEAK)
        assert d_m_quad == pytest.approx(d_m, rel=1e-2)

    def test_singular_permittivity(self):
        cfg = unit_cavity(epsilon1=StepPermittivity(4.0, 0.0))
        with pytest.raises(SingularPermittivityError):
            plasma_displacements(cfg, 0.2)

    def test_negative_density(self):
        cfg = unit_cavity(surface_density=RaisedCosine(-1.0, OMEGA))
        with pytest.raises(ValueError):
            plasma_displacements(cfg, 0.2)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            plasma_displacements(unit_cavity(), -1.0)

    def test_vectorised(self):
        t = np.linspace(0.0, 1.0, 11)
        d_eps, d_m = plasma_displacements(unit_cavity(), t)
        assert d_eps.shape == d_m.shape == t.shape
        assert d_m[0] == 0.0

    @settings(max_examples=30, deadline=None)
    @given(c=st.floats(0.01, 100.0), t=st.floats(0.0, 3.0))
    def test_density_scaling_is_linear(self, c, t):
        base = plasma_displacements(unit_cavity(), t)[1]
        scaled = plasma_displacements(unit_cavity(surface_density=pulsed_surface_density(c, OMEGA)), t)[1]
        assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-300)

    @settings(max_examples=30, deadline=None)
    @given(l1=st.floats(0.1, 0.4), l2=st.floats(0.55, 0.9))
    def test_position_follows_mode_square(self, l1, l2):
        a = plasma_displacements(unit_cavity(slab_position=l1), T_PEAK)[1]
        b = plasma_displacements(unit_cavity(slab_position=l2), T_PEAK)[1]
        assert a / b == pytest.approx(math.sin(math.pi * l1) ** 2 / math.sin(math.pi * l2) ** 2, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(ratio=st.floats(1.0, 50.0), t=st.floats(0.01, 2.0))
    def test_signs(self, ratio, t):
        cfg = unit_cavity(epsilon1=StepPermittivity(4.0, 4.0 * ratio))
        d_eps, d_m = plasma_displacements(cfg, t)
        assert d_eps <= 0.0
        assert d_m >= 0.0


class TestCouplingSchedule:
    def test_diagonal_at_start(self):
        sched = coupling_schedule(unit_cavity(epsilon1=StepPermittivity(4.0, 6.0)))
        w, g = sched.coefficients(np.array([0.0]))
        assert w[0] == sched.omega0
        assert g[0] == 0

    def test_conductivity_dominated_point(self):
        # delta_m / L = 0.02 at the density peak
        cfg = unit_cavity(e2_over_m=0.02 * math.pi**2)
        sched = coupling_schedule(cfg, OMEGA)
        dw = sched.delta_omega(T_PEAK)
        g = sched.g(T_PEAK)
        assert dw == pytest.approx(0.02 * cfg.omega0, rel=1e-12)
        assert g == pytest.approx(-0.01j * cfg.omega0, rel=1e-12)

    def test_cancellation(self):
        # pick eps1(t) < eps1(0) so that delta_eps = delta_m at the density peak
        d_m_over_d = 1e3 / math.pi**2
        eps_t = 4.0 / (1.0 + d_m_over_d / 4.0)
        cfg = unit_cavity(epsilon1=StepPermittivity(4.0, eps_t))
        d_eps, d_m = plasma_displacements(cfg, T_PEAK)
        assert d_eps == pytest.approx(d_m, rel=1e-12)
        sched = coupling_schedule(cfg)
        assert abs(sched.g(T_PEAK)) < 1e-12 * cfg.omega0
        assert sched.delta_omega(T_PEAK) == pytest.approx(2 * cfg.omega0 * d_m / cfg.cavity_length, rel=1e-12)

    def test_unchanged_medium(self):
        sched = coupling_schedule(unit_cavity(surface_density=Constant(0.0)))
        t = np.linspace(0.0, 5.0, 7)
        w, g = sched.coefficients(t)
        assert np.all(w == sched.omega0)
        assert np.all(g == 0)

    def test_multimode_checks(self):
        t = np.array([0.1, 0.2])
        bad_mu = CouplingSchedule(
            omega0=np.array([1.0, 3.0]),
            delta_omega=Constant(0.0),
            g=Constant(0.0),
            mu=lambda t: np.broadcast_to(np.array([[0.0, 1.0], [2.0, 0.0]]), np.shape(t) + (2, 2)),
        )
        with pytest.raises(ValueError, match="Hermitian"):
            bad_mu.coefficients(t)
        diag_mu = CouplingSchedule(
            omega0=np.array([1.0, 3.0]),
            delta_omega=Constant(0.0),
            g=Constant(0.0),
            mu=lambda t: np.broadcast_to(np.eye(2), np.shape(t) + (2, 2)),
        )
        with pytest.raises(ValueError, match="zero diagonal"):
            diag_mu.coefficients(t)

    def test_validity_warning(self):
        with pytest.warns(ModelValidityWarning):
            check_frequency_shift(0.2, 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            check_frequency_shift(0.1, 1.0)


class TestInstantaneous:
    def test_matches_analytic_derivative(self):
        # frozen oracle: g = 2<g>(1 - cos Wt) -> g_bar = i/(2 w0) 2<g> W sin Wt
        two_g, Omega = 0.01j, 2.04
        sched = default_schedule(1.0, 0.0, two_g, Omega)
        inst = to_instantaneous(sched)
        t = np.linspace(0.0, 4 * math.pi / Omega, 1001)
        exact = 1j / 2.0 * two_g * Omega * np.sin(Omega * t)
        err = np.max(np.abs(inst.g(t) - exact))
        assert err <= 1e-6 * np.max(np.abs(exact))
        assert inst.formulation is Formulation.INSTANTANEOUS

    def test_zero_and_constant_coupling(self):
        for g in (Constant(0.0), Constant(0.3 + 0.1j)):
            sched = CouplingSchedule(1.0, Constant(0.0), g, drive_frequency=2.0)
            out = to_instantaneous(sched).g(np.linspace(0.0, 10.0, 50))
            assert np.max(np.abs(out)) < 1e-10

    def test_frequency_shift_unchanged(self):
        sched = default_schedule(1.0, 0.02, 0.01j, 2.04)
        inst = to_instantaneous(sched)
        t = np.linspace(0, 3, 9)
        assert np.array_equal(inst.omega(t), sched.omega(t))

    def test_rejects_instantaneous_input(self):
        inst = to_instantaneous(default_schedule(1.0, 0.0, 0.01j, 2.0))
        with pytest.raises(FormulationError):
            to_instantaneous(inst)


class TestDispersion:
    def test_uniform_medium(self):
        cfg = unit_cavity(epsilon1=Constant(1.0), surface_density=Constant(0.0))
        w2, kp2 = dispersion_check(cfg, 0.3)
        assert kp2 == pytest.approx(cfg.k**2)

    def test_arithmetic_example(self):
        # eps0 = 1, k = pi, eps1 = 4, m_p^2 = pi^2 -> (pi^2, 3 pi^2)
        cfg = unit_cavity(
            epsilon1=Constant(4.0),
            surface_density=pulsed_surface_density(math.pi**2 * 1e-3, OMEGA),
            e2_over_m=1.0,
        )
        w2, kp2 = dispersion_check(cfg, T_PEAK)
        assert w2 == pytest.approx(math.pi**2)
        assert kp2 == pytest.approx(3 * math.pi**2)

    def test_evanescent_is_legal(self):
        cfg = unit_cavity(surface_density=pulsed_surface_density(1.0, OMEGA), e2_over_m=1e3)
        _, kp2 = dispersion_check(cfg, T_PEAK)
        assert kp2 < 0
