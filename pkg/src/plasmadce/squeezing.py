"""Bogoliubov dynamics of the driven cavity field.

The Heisenberg evolution a(t) = A a + B* a^dagger is integrated with
fixed-step RK4 directly from the time-dependent coefficients (no RWA).
The rotating-wave closed form is provided separately as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cavity_modes import (
    CouplingSchedule,
    Formulation,
    RaisedCosine,
    check_frequency_shift,
    default_schedule,
    evaluate,
)

DEFAULT_STEPS_PER_PERIOD = 200
MAX_STEP_FRACTION = 1.0 / 50.0
FOURIER_SAMPLES = 2048
SERIES_CUTOFF = 1e-4


class IntegrationError(RuntimeError):
    """The symplectic invariant drifted beyond tolerance."""


class StepSizeError(ValueError):
    pass


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class BogoliubovState:
    A: np.ndarray
    B: np.ndarray
    t: float = 0.0

    @classmethod
    def vacuum(cls, n_modes: int = 1) -> "BogoliubovState":
        return cls(np.eye(n_modes, dtype=complex), np.zeros((n_modes, n_modes), dtype=complex), 0.0)

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=complex)))
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, dtype=complex)))
        if self.A.shape != self.B.shape or self.A.shape[0] != self.A.shape[1]:
            raise ValueError("A and B must be square matrices of equal shape")

    @property
    def n_modes(self) -> int:
        return self.A.shape[0]

    def invariant_error(self) -> float:
        """Frobenius norm of A A^dagger - B* B^T - 1 (|A|^2 - |B|^2 - 1 for one mode)."""
        A, B = self.A, self.B
        dev = A @ A.conj().T - B.conj() @ B.T - np.eye(self.n_modes)
        return float(np.linalg.norm(dev))

    def squeezing_parameters(self, mode: int = 0):
        """``(r, phi_A, phi_B)`` of one mode: A = cosh r e^{i phi_A}, B = sinh r e^{i phi_B}."""
        a = self.A[mode, mode]
        b = self.B[mode, mode]
        return float(np.arccosh(max(abs(a), 1.0))), float(np.angle(a)), float(np.angle(b))


@dataclass(frozen=True)
class DriveSpec:
    """Periodic laser drive in the rotating-wave picture.

    ``g_fourier`` is the Fourier component <g>_Omega; the drive frequency
    follows from Omega = 2 (omega0 + <dw> + Delta).
    """

    omega0: float
    mean_delta_omega: float
    g_fourier: complex
    detuning: float = 0.0
    n_pulses: int = 1
    Omega: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g_fourier", complex(self.g_fourier))
        Omega = 2.0 * (self.omega0 + self.mean_delta_omega + self.detuning)
        if Omega <= 0:
            raise ValueError(f"drive frequency must be positive, got {Omega}")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError("n_pulses must be a positive integer")
        object.__setattr__(self, "n_pulses", int(self.n_pulses))
        object.__setattr__(self, "Omega", Omega)

    @classmethod
    def from_frequency(cls, omega0, mean_delta_omega, g_fourier, Omega, n_pulses=1):
        detuning = 0.5 * Omega - omega0 - mean_delta_omega
        return cls(omega0, mean_delta_omega, g_fourier, detuning, n_pulses)

    @classmethod
    def from_schedule(cls, schedule: CouplingSchedule, Omega: float, n_pulses: int = 1, samples: int = FOURIER_SAMPLES):
        """Extract <dw> (period average) and <g>_Omega (projection on e^{-i Omega t})."""
        if schedule.multimode:
            raise ValueError("DriveSpec describes a single mode")
        T = 2.0 * math.pi / Omega
        t = np.arange(samples) * (T / samples)
        dw = np.asarray(evaluate(schedule.delta_omega, t), dtype=float)
        g = np.asarray(evaluate(schedule.g, t), dtype=complex)
        mean_dw = float(dw.mean())
        g_omega = complex(np.mean(g * np.exp(1j * Omega * t)))
        return cls.from_frequency(float(schedule.omega0), mean_dw, g_omega, Omega, n_pulses)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.Omega

    @property
    def t1(self) -> float:
        """Duration of the pulse train, N_pulse * 2 pi / Omega."""
        return self.n_pulses * self.period

    @property
    def coupling(self) -> float:
        """|2 <g>_Omega|."""
        return 2.0 * abs(self.g_fourier)

    @property
    def branch(self) -> str:
        c, d = self.coupling, abs(self.detuning)
        if d < c:
            return "growing"
        if d == c:
            return "critical"
        return "oscillating"

    def schedule(self) -> CouplingSchedule:
        """Raised-cosine waveforms with this drive's mean shift and Fourier amplitude."""
        return default_schedule(self.omega0, self.mean_delta_omega, 2.0 * self.g_fourier, self.Omega)


@dataclass(frozen=True)
class CavityLoss:
    Q: float
    omega0: float = 1.0

    def __post_init__(self):
        if not self.Q > 0:
            raise ValueError("quality factor must be positive")

    @property
    def Gamma(self) -> float:
        return 0.0 if math.isinf(self.Q) else self.omega0 / self.Q


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the master equations.

    ``A`` and ``B`` have shape ``(n_samples,)`` for one mode and
    ``(n_samples, n, n)`` otherwise.  ``strobe`` flags samples taken at whole
    drive periods.
    """

    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    strobe: np.ndarray
    formulation: Formulation
    drive_frequency: Optional[float]

    @property
    def multimode(self) -> bool:
        return self.A.ndim == 3

    @property
    def n_pulse(self) -> np.ndarray:
        if not self.drive_frequency:
            return np.full_like(self.t, np.nan)
        return self.t * self.drive_frequency / (2.0 * math.pi)

    def photon_number(self, mode: int = 0) -> np.ndarray:
        if not self.multimode:
            if mode != 0:
                raise IndexError("single-mode trajectory has only mode 0")
            return np.abs(self.B) ** 2
        return np.sum(np.abs(self.B[:, mode, :]) ** 2, axis=-1)

    def invariant_error(self) -> np.ndarray:
        if not self.multimode:
            return np.abs(np.abs(self.A) ** 2 - np.abs(self.B) ** 2 - 1.0)
        n = self.A.shape[-1]
        dev = self.A @ np.conj(np.swapaxes(self.A, -1, -2)) - np.conj(self.B) @ np.swapaxes(self.B, -1, -2)
        return np.linalg.norm(dev - np.eye(n), axis=(-2, -1))

    def state(self, i: int) -> BogoliubovState:
        return BogoliubovState(self.A[i], self.B[i], float(self.t[i]))

    @property
    def final(self) -> BogoliubovState:
        return self.state(-1)

    def stroboscopic(self) -> "Trajectory":
        m = self.strobe
        return Trajectory(self.t[m], self.A[m], self.B[m], self.strobe[m], self.formulation, self.drive_frequency)

    def records(self) -> np.ndarray:
        """Rows of (t, N_pulse, Re A, Im A, Re B, Im B, n_gamma) for mode 0."""
        a = self.A if not self.multimode else self.A[:, 0, 0]
        b = self.B if not self.multimode else self.B[:, 0, 0]
        return np.column_stack(
            [self.t, self.n_pulse, a.real, a.imag, b.real, b.imag, self.photon_number(0)]
        )


# -- integration -------------------------------------------------------------

def _time_grid(period: float, t_end: float, step: float):
    """Uniform steps commensurate with the drive period, plus a short final step if needed."""
    steps_per_period = max(1, math.ceil(period / step - 1e-9))
    h = period / steps_per_period
    n_full = math.floor(t_end / h + 1e-9)
    hs = np.full(n_full, h)
    times = np.arange(n_full + 1) * h
    if t_end - n_full * h > 1e-12 * h:
        hs = np.append(hs, t_end - n_full * h)
        times = np.append(times, t_end)
    return steps_per_period, n_full, hs, times


def integrate(
    schedule: CouplingSchedule,
    t_end: float,
    step: Optional[float] = None,
    *,
    sample_every: int = 1,
    drift_tol: float = 1e-5,
    backend: Optional[str] = None,
) -> Trajectory:
    """Integrate the master equations from A = 1, B = 0 up to ``t_end``.

    Parameters
    ----------
    schedule
        Canonical or instantaneous-mode coefficients; multimode when
        ``schedule.omega0`` is an array.
    step
        Requested RK4 step; rounded down so that a whole number of steps
        fits in one drive period.  Default: period / 200.  Steps longer than
        period / 50 are rejected.
    sample_every
        Dense sampling stride in steps.  Whole-period samples and the final
        point are always kept.
    drift_tol
        Limit on ``|I - 1| / max(1, |A|^2 + |B|^2)`` where ``I`` is the
        symplectic invariant; exceeding it raises IntegrationError.
    backend
        ``"numba"``, ``"numpy"`` or None (environment default).
    """
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    period = schedule.drive_period
    if step is None:
        step = period / DEFAULT_STEPS_PER_PERIOD
    if step <= 0:
        raise StepSizeError("step must be positive")
    if step > period * MAX_STEP_FRACTION * (1 + 1e-12):
        raise StepSizeError(f"step {step:.4g} exceeds drive period / 50 = {period / 50:.4g}")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")

    spp, n_full, hs, times = _time_grid(period, t_end, step)
    n_steps = hs.size
    abscissae = times[:-1, None] + hs[:, None] * np.array([0.0, 0.5, 1.0])
    W, G = schedule.coefficients(abscissae)
    if schedule.multimode:
        shift = np.real(np.diagonal(W, axis1=-2, axis2=-1)) - np.asarray(schedule.omega0)
    else:
        shift = W - float(schedule.omega0)
    check_frequency_shift(shift, schedule.omega0)

    idx = np.arange(n_steps + 1)
    strobe_steps = (idx % spp == 0) & (idx <= n_full)
    record = (idx % sample_every == 0) | (idx == n_steps) | strobe_steps

    scalar_loop, matrix_loop = kernels.select(backend)
    if schedule.multimode:
        n = schedule.n_modes
        A, B = matrix_loop(
            np.ascontiguousarray(W), np.ascontiguousarray(G), hs, record,
            np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex),
        )
    else:
        A, B = scalar_loop(np.ascontiguousarray(W), np.ascontiguousarray(G), hs, record, 1.0 + 0j, 0j)

    traj = Trajectory(
        t=times[record],
        A=A,
        B=B,
        strobe=strobe_steps[record],
        formulation=schedule.formulation,
        drive_frequency=schedule.drive_frequency,
    )
    _check_drift(traj, drift_tol)
    return traj


def _check_drift(traj: Trajectory, tol: float):
    if traj.multimode:
        scale = np.sum(np.abs(traj.A) ** 2 + np.abs(traj.B) ** 2, axis=(-2, -1))
    else:
        scale = np.abs(traj.A) ** 2 + np.abs(traj.B) ** 2
    rel = traj.invariant_error() / np.maximum(1.0, scale)
    worst = float(np.max(rel)) if rel.size else 0.0
    if not np.isfinite(worst) or worst > tol:
        raise IntegrationError(f"symplectic invariant drift {worst:.3g} exceeds tolerance {tol:.3g}")


# -- observables and closed forms -----------------------------------------

def photon_number(state: BogoliubovState, mode: int = 0) -> float:
    """n_gamma of one mode: sum over beta of |B_{mode, beta}|^2."""
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode} out of range for {state.n_modes} mode(s)")
    return float(np.sum(np.abs(state.B[mode]) ** 2))


def effective_squeezing_rate(drive: DriveSpec) -> complex:
    """chi = sqrt(|2<g>|^2 - Delta^2); purely imaginary past the threshold detuning."""
    chi_sq = drive.coupling**2 - drive.detuning**2
    if chi_sq >= 0:
        return complex(math.sqrt(chi_sq), 0.0)
    return complex(0.0, math.sqrt(-chi_sq))


def rwa_photon_number(drive: DriveSpec, t):
    """Rotating-wave photon number |2<g>/chi|^2 sinh^2(chi t), all three branches.

    Below |chi| t = 1e-4 the series t^2 |2<g>|^2 (1 + chi^2 t^2 / 3) is used,
    which also covers the critical detuning exactly.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    c2 = drive.coupling**2
    chi_sq = c2 - drive.detuning**2
    chi_abs = math.sqrt(abs(chi_sq))
    x = chi_abs * t
    series = c2 * t**2 * (1.0 + chi_sq * t**2 / 3.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if chi_sq > 0:
            exact = c2 / chi_sq * np.sinh(x) ** 2
        else:
            exact = c2 / max(-chi_sq, np.finfo(float).tiny) * np.sin(x) ** 2
    out = np.where(x < SERIES_CUTOFF, series, exact)
    return float(out) if out.ndim == 0 else out


def resonance_frequency(omega0: float, mean_delta_omega: float) -> float:
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    return 2.0 * (omega0 + mean_delta_omega)


def apply_damping(n_gamma, loss: CavityLoss, t):
    """Photon number after the cavity-loss factor exp(-Gamma t)."""
    if np.any(np.asarray(n_gamma) < 0) or np.any(np.asarray(t) < 0):
        raise ValueError("n_gamma and t must be non-negative")
    return n_gamma * np.exp(-loss.Gamma * np.asarray(t)) if np.ndim(t) or np.ndim(n_gamma) \
        else n_gamma * math.exp(-loss.Gamma * t)


def dce_threshold(drive: DriveSpec, loss: CavityLoss) -> bool:
    """True iff Re(chi) > Gamma / 2 (strict)."""
    return effective_squeezing_rate(drive).real > 0.5 * loss.Gamma


def thermal_amplification(n_initial: float, state: BogoliubovState, mode: int = 0) -> float:
    """Initially present photons after the drive: (1 + 2 |B|^2) <a^dagger a>."""
    if n_initial < 0:
        raise ValueError("n_initial must be non-negative")
    return (1.0 + 2.0 * photon_number(state, mode)) * n_initial


def intermode_resonant_pair(first: Sequence[int], second: Sequence[int], tol: float = 1e-12):
    """Cubic-cavity modes (nx, ny, nz): is omega2 = 3 omega1?  Returns ``(resonant, ratio)``."""
    n1 = np.asarray(first, dtype=float)
    n2 = np.asarray(second, dtype=float)
    if n1.shape != (3,) or n2.shape != (3,):
        raise ValueError("mode labels must be integer triples")
    if not n1.any() or not n2.any():
        raise ValueError("zero mode triple")
    ratio = math.sqrt(float(n2 @ n2) / float(n1 @ n1))
    return abs(ratio - 3.0) <= tol, ratio


def intermode_pair_schedule(
    omega1: float,
    two_g: complex,
    mu_amplitude: complex,
    frequency_ratio: float = 3.0,
    mean_delta_omega: float = 0.0,
    Omega: Optional[float] = None,
) -> CouplingSchedule:
    """Two modes, omega2 = ratio * omega1: mode 1 squeezed, modes coupled by mu12.

    Both couplings follow the raised-cosine profile of the drive.
    """
    if Omega is None:
        Omega = resonance_frequency(omega1, mean_delta_omega)
    omegas = np.array([omega1, frequency_ratio * omega1])
    mu = np.array([[0.0, mu_amplitude], [np.conj(mu_amplitude), 0.0]], dtype=complex)
    g = np.array([two_g, 0.0], dtype=complex)
    return CouplingSchedule(
        omega0=omegas,
        delta_omega=RaisedCosine(np.array([mean_delta_omega, 0.0]), Omega),
        g=RaisedCosine(g, Omega),
        mu=RaisedCosine(mu, Omega),
        drive_frequency=Omega,
    )
