import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from plasmadce.cavity_modes import Constant, CouplingSchedule, Formulation, to_instantaneous
from plasmadce.squeezing import (
    BogoliubovState,
    CavityLoss,
    DriveSpec,
    StepSizeError,
    apply_damping,
    dce_threshold,
    effective_squeezing_rate,
    integrate,
    intermode_pair_schedule,
    intermode_resonant_pair,
    photon_number,
    resonance_frequency,
    rwa_photon_number,
    thermal_amplification,
)

NOMINAL = dict(omega0=1.0, mean_delta_omega=0.02, g_fourier=0.005j)


def nominal(detuning=0.0, n_pulses=30):
    return DriveSpec(detuning=detuning, n_pulses=n_pulses, **NOMINAL)


def reference_solution(schedule, t_end, rtol=1e-12):
    """Independent oracle: adaptive DOP853 on the same single-mode equations."""

    def rhs(t, y):
        w, g = schedule.coefficients(np.array([t]))
        a, b = y
        return [-1j * w[0] * a + 2 * g[0] * b, 1j * w[0] * b + 2 * np.conj(g[0]) * a]

    sol = solve_ivp(rhs, (0.0, t_end), [1.0 + 0j, 0j], method="DOP853", rtol=rtol, atol=1e-14)
    return sol.y[0, -1], sol.y[1, -1]


class TestDriveSpec:
    def test_frequency_identity(self):
        d = DriveSpec(1.0, 0.02, 0.005j, detuning=-0.01)
        assert d.Omega == 2 * (1.0 + 0.02 - 0.01)

    def test_from_frequency_round_trip(self):
        d = DriveSpec.from_frequency(1.0, 0.02, 0.005j, 2.0)
        assert d.detuning == pytest.approx(-0.02)
        assert d.Omega == pytest.approx(2.0)

    def test_fourier_extraction(self):
        d = nominal()
        back = DriveSpec.from_schedule(d.schedule(), d.Omega)
        assert back.mean_delta_omega == pytest.approx(0.02, rel=1e-12)
        assert back.coupling == pytest.approx(0.01, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(n_pulses=0), dict(n_pulses=1.5), dict(detuning=-2.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            DriveSpec(1.0, 0.02, 0.005j, **kw)

    def test_t1(self):
        assert nominal(n_pulses=30).t1 == pytest.approx(30 * 2 * math.pi / 2.04)


class TestIntegrate:
    def test_free_evolution(self):
        sched = CouplingSchedule(1.0, Constant(0.0), Constant(0.0), drive_frequency=2.0)
        traj = integrate(sched, 20.0)
        assert np.max(traj.photon_number()) == 0.0
        assert np.allclose(traj.A, np.exp(-1j * traj.t), atol=1e-9)

    def test_matches_adaptive_oracle(self):
        d = nominal(n_pulses=30)
        traj = integrate(d.schedule(), d.t1)
        a_ref, b_ref = reference_solution(d.schedule(), d.t1)
        assert abs(traj.final.A[0, 0] - a_ref) < 1e-7 * abs(a_ref)
        assert abs(traj.final.B[0, 0] - b_ref) < 1e-7 * abs(b_ref)

    def test_thirty_pulses_on_resonance(self):
        d = nominal(n_pulses=30)
        n = integrate(d.schedule(), d.t1).photon_number()[-1]
        assert n == pytest.approx(math.sinh(0.01 * d.t1) ** 2, rel=0.1)

    def test_off_resonance_bounded(self):
        d = nominal(detuning=-0.02, n_pulses=30)
        n = integrate(d.schedule(), d.t1).photon_number()
        assert np.max(n) < 0.4

    def test_samples_include_ends_and_strobe(self):
        d = nominal(n_pulses=5)
        traj = integrate(d.schedule(), d.t1, sample_every=7)
        assert traj.t[0] == 0.0
        assert traj.t[-1] == pytest.approx(d.t1)
        strobe = traj.stroboscopic()
        assert strobe.t.size == 6
        assert np.allclose(strobe.n_pulse, np.arange(6))
        assert np.all(np.diff(traj.t) > 0)

    def test_partial_period_end(self):
        d = nominal(n_pulses=2)
        traj = integrate(d.schedule(), 1.3 * d.period)
        assert traj.t[-1] == pytest.approx(1.3 * d.period)

    def test_step_rejected(self):
        d = nominal()
        with pytest.raises(StepSizeError):
            integrate(d.schedule(), 10.0, step=d.period / 40)
        with pytest.raises(StepSizeError):
            integrate(d.schedule(), 10.0, step=0.0)

    def test_records_layout(self):
        d = nominal(n_pulses=2)
        rec = integrate(d.schedule(), d.t1).records()
        assert rec.shape[1] == 7
        assert np.allclose(rec[:, 6], rec[:, 4] ** 2 + rec[:, 5] ** 2)

    def test_backends_agree(self):
        d = nominal(n_pulses=10)
        a = integrate(d.schedule(), d.t1, backend="numba")
        b = integrate(d.schedule(), d.t1, backend="numpy")
        assert np.allclose(a.B, b.B, rtol=1e-13, atol=1e-15)

    def test_instantaneous_formulation_tracked(self):
        d = nominal(n_pulses=3)
        traj = integrate(to_instantaneous(d.schedule()), d.t1)
        assert traj.formulation is Formulation.INSTANTANEOUS

    @pytest.mark.filterwarnings("ignore::plasmadce.cavity_modes.ModelValidityWarning")
    @settings(max_examples=15, deadline=None)
    @given(
        shift=st.floats(0.0, 0.05),
        coupling=st.floats(0.0, 0.02),
        phase=st.floats(0.0, 2 * math.pi),
        detuning=st.floats(-0.03, 0.03),
    )
    def test_invariant_holds(self, shift, coupling, phase, detuning):
        d = DriveSpec(1.0, shift, 0.5 * coupling * np.exp(1j * phase), detuning, 20)
        traj = integrate(d.schedule(), d.t1)
        # RK4 damps a free rotation by (omega h)^6 / 72 per step: ~1e-9 after 4000 steps at h = T/200
        h = d.period / 200
        bound = 4000 * (1.0 + shift * 2) ** 6 * h**6 / 72
        assert np.max(traj.invariant_error()) < 5 * bound

    def test_squeezing_parameter_grows_on_resonance(self):
        d = nominal(n_pulses=60)
        strobe = integrate(d.schedule(), d.t1).stroboscopic()
        r = np.array([strobe.state(i).squeezing_parameters()[0] for i in range(strobe.t.size)])
        assert np.all(np.diff(r) >= 0)


class TestMultimode:
    def test_pair_invariant_fine_step(self):
        # the omega2 = 3 omega1 mode needs period / 800 for a 1e-8 Frobenius bound
        sched = intermode_pair_schedule(1.0, 0.01j, 0.01, Omega=2.0)
        traj = integrate(sched, 50 * math.pi, step=math.pi / 800)
        assert np.max(traj.invariant_error()) < 1e-8

    def test_pair_invariant_default_step_is_loose(self):
        sched = intermode_pair_schedule(1.0, 0.01j, 0.01, Omega=2.0)
        traj = integrate(sched, 50 * math.pi)
        assert np.max(traj.invariant_error()) < 1e-5

    def test_pair_both_modes_grow(self):
        sched = intermode_pair_schedule(1.0, 0.01j, 0.01, Omega=2.0)
        traj = integrate(sched, 300 * math.pi)
        n1, n2 = traj.photon_number(0), traj.photon_number(1)
        assert n1[-1] > 10 and n2[-1] > 10
        with pytest.raises(IndexError):
            photon_number(traj.final, 2)

    def test_uncoupled_modes_are_independent(self):
        # without mu the second mode never squeezes
        sched = intermode_pair_schedule(1.0, 0.01j, 0.0, Omega=2.0)
        traj = integrate(sched, 50 * math.pi)
        assert np.max(traj.photon_number(1)) == 0.0


class TestClosedForms:
    def test_rwa_zero_time(self):
        assert rwa_photon_number(nominal(), 0.0) == 0.0

    def test_rwa_critical(self):
        d = DriveSpec(1.0, 0.0, 0.005j, detuning=0.01)
        assert rwa_photon_number(d, 100.0) == pytest.approx(1.0, rel=1e-12)

    def test_rwa_long_run(self):
        assert rwa_photon_number(nominal(), 924.0) == pytest.approx(math.sinh(9.24) ** 2, rel=1e-12)
        assert 2.5e7 < rwa_photon_number(nominal(), 924.0) < 2.7e7

    def test_rwa_off_resonance_bound(self):
        d = nominal(detuning=-0.02)
        t = np.linspace(0, 2000, 5001)
        assert np.max(rwa_photon_number(d, t)) <= 1 / 3 + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(detuning=st.floats(0.0, 0.03), t=st.floats(0.0, 500.0))
    def test_rwa_even_in_detuning(self, detuning, t):
        a = rwa_photon_number(DriveSpec(1.0, 0.0, 0.005j, detuning), t)
        b = rwa_photon_number(DriveSpec(1.0, 0.0, 0.005j, -detuning), t)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-300)

    def test_rwa_continuous_across_boundary(self):
        t = 150.0
        values = [rwa_photon_number(DriveSpec(1.0, 0.0, 0.005j, 0.01 + e), t) for e in (-1e-9, 0.0, 1e-9)]
        assert max(values) - min(values) < 1e-5 * values[1]

    def test_series_matches_exact_at_cutoff(self):
        d = DriveSpec(1.0, 0.0, 0.005j, 0.0)
        t_cut = 1e-4 / 0.01
        exact = (math.sinh(0.01 * t_cut)) ** 2
        assert rwa_photon_number(d, t_cut * (1 - 1e-9)) == pytest.approx(exact, rel=1e-6)

    def test_effective_rate(self):
        assert effective_squeezing_rate(nominal()) == pytest.approx(0.01)
        assert effective_squeezing_rate(DriveSpec(1.0, 0.0, 0.005j, 0.01)) == 0
        chi = effective_squeezing_rate(nominal(detuning=-0.02))
        assert chi.real == 0 and chi.imag == pytest.approx(math.sqrt(3) * 0.01)
        assert nominal(detuning=-0.02).branch == "oscillating"

    @pytest.mark.parametrize("shift,expected", [(0.0, 2.0), (0.02, 2.04), (-0.01, 1.98)])
    def test_resonance(self, shift, expected):
        assert resonance_frequency(1.0, shift) == pytest.approx(expected)

    def test_damping(self):
        assert apply_damping(5.0, CavityLoss(math.inf), 1e9) == 5.0
        assert apply_damping(4.0, CavityLoss(1.0 / math.log(2)), 1.0) == pytest.approx(2.0)
        assert apply_damping(1.0, CavityLoss(1e3), 1e3) == pytest.approx(math.exp(-1))
        with pytest.raises(ValueError):
            apply_damping(-1.0, CavityLoss(1e3), 1.0)

    def test_loss_identity(self):
        loss = CavityLoss(5e3, 1.5e10)
        assert loss.Gamma * loss.Q == pytest.approx(1.5e10)
        with pytest.raises(ValueError):
            CavityLoss(0.0)

    def test_threshold(self):
        assert dce_threshold(nominal(), CavityLoss(1e3))
        assert not dce_threshold(nominal(detuning=-0.02), CavityLoss(math.inf))
        assert not dce_threshold(nominal(), CavityLoss(50.0))  # chi = Gamma / 2 exactly

    def test_thermal(self):
        s = BogoliubovState(np.array([[2.0]]), np.array([[math.sqrt(3)]]))
        assert thermal_amplification(1.0, s) == pytest.approx(7.0)
        assert thermal_amplification(0.0, s) == 0.0
        assert thermal_amplification(2.5, BogoliubovState.vacuum()) == 2.5

    def test_photon_number_definition(self):
        assert photon_number(BogoliubovState.vacuum()) == 0.0
        assert photon_number(BogoliubovState(np.array([[math.sqrt(2)]]), np.array([[1.0]]))) == 1.0
        with pytest.raises(IndexError):
            photon_number(BogoliubovState.vacuum(), 1)

    @pytest.mark.parametrize(
        "pair,resonant,ratio",
        [(((1, 1, 1), (1, 1, 5)), True, 3.0), (((1, 1, 1), (1, 1, 2)), False, math.sqrt(2)),
         (((1, 1, 1), (1, 1, 1)), False, 1.0)],
    )
    def test_intermode_pair(self, pair, resonant, ratio):
        ok, r = intermode_resonant_pair(*pair)
        assert ok is resonant
        assert r == pytest.approx(ratio, rel=1e-15)

    def test_zero_triple(self):
        with pytest.raises(ValueError):
            intermode_resonant_pair((0, 0, 0), (1, 1, 1))
