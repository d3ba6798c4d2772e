"""Plasma-mirror cavity: from slab/laser parameters to Hamiltonian coefficients.

Natural units (hbar = c = 1) throughout.  A single longitudinal mode of an
effective 1+1 D scalar field is modelled; the slab occupies ``[l, l + delta]``
inside a cavity ``[0, L]`` with Dirichlet walls.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _quad

VALIDITY_LIMIT = 0.1


class ModelValidityWarning(UserWarning):
    """|delta_omega| / omega0 exceeded the range where the fixed-basis couplings hold."""


class SingularPermittivityError(ValueError):
    pass


class FormulationError(ValueError):
    pass


class Formulation(enum.Enum):
    CANONICAL = "canonical"
    INSTANTANEOUS = "instantaneous"


def evaluate(func, t):
    """Evaluate a user time function on scalar or array ``t``.

    Vectorised call first; falls back to a per-element loop for scalar-only
    callables.
    """
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim == 0:
        return func(float(t_arr))
    try:
        out = np.asarray(func(t_arr))
        if out.shape[: t_arr.ndim] == t_arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([func(float(x)) for x in t_arr.ravel()]).reshape(
        t_arr.shape + np.shape(func(float(t_arr.ravel()[0])))
    )


def check_frequency_shift(delta_omega, omega0):
    """Warn when the relative frequency shift leaves the model's validity range."""
    ratio = np.max(np.abs(np.asarray(delta_omega)) / np.asarray(omega0))
    if ratio > VALIDITY_LIMIT:
        warnings.warn(
            f"|delta_omega|/omega0 reaches {ratio:.3g} (> {VALIDITY_LIMIT}); "
            "fixed-basis couplings are outside their validity range",
            ModelValidityWarning,
            stacklevel=3,
        )
    return ratio


# -- waveforms -------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        return np.full(np.shape(t), self.value) if np.ndim(t) else self.value


@dataclass(frozen=True)
class RaisedCosine:
    """``amplitude * (1 - cos(Omega t))``: zero at t = 0, mean ``amplitude``.

    ``amplitude`` may be complex or an array (one entry per mode or matrix element).
    """

    amplitude: complex
    Omega: float

    def __call__(self, t):
        c = 1.0 - np.cos(self.Omega * np.asarray(t, dtype=float))
        amp = np.asarray(self.amplitude)
        if amp.ndim == 0:
            out = amp * c
            return out if np.ndim(t) else out.item()
        return np.multiply.outer(c, amp)


def pulsed_surface_density(peak: float, Omega: float) -> RaisedCosine:
    """Periodic laser excitation: n_s(t) = peak * (1 - cos Omega t) / 2."""
    return RaisedCosine(0.5 * peak, Omega)


# -- slab configuration ----------------------------------------------------

@dataclass(frozen=True)
class SlabCavityConfig:
    """Cavity of length L with a thin semiconductor slab at x = l.

    ``epsilon1`` and ``surface_density`` are side-effect-free callables of
    time; ``surface_density(0)`` must vanish (laser off at t = 0).
    """

    cavity_length: float
    slab_position: float
    slab_thickness: float
    epsilon0: float
    epsilon1: Callable[[float], float]
    surface_density: Callable[[float], float]
    e2_over_m: float
    k: float
    k_perp: float = 0.0

    def __post_init__(self):
        L, l, d = self.cavity_length, self.slab_position, self.slab_thickness
        if not 0.0 < d < L:
            raise ValueError(f"slab thickness must satisfy 0 < delta < L, got delta={d}, L={L}")
        if not 0.0 <= l <= L - d:
            raise ValueError(f"slab position must satisfy 0 <= l <= L - delta, got l={l}")
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")
        if float(self.epsilon1(0.0)) <= 0:
            raise ValueError("epsilon1(0) must be positive")
        if abs(float(self.surface_density(0.0))) > 0.0:
            raise ValueError("surface density must vanish at t = 0 (laser off)")
        if self.k <= 0:
            raise ValueError("mode wavenumber k must be positive")

    @classmethod
    def standing_wave(cls, mode_number: int, cavity_length: float, **kwargs):
        """Baseline slab-off mode: k = n pi / L."""
        return cls(cavity_length=cavity_length, k=mode_number * math.pi / cavity_length, **kwargs)

    @property
    def omega0(self) -> float:
        return math.sqrt((self.k**2 + self.k_perp**2) / self.epsilon0)

    @property
    def mode_weight(self) -> float:
        """sin^2(k l), or (k delta)^2 / 3 for a slab touching the wall."""
        if self.slab_position == 0.0:
            return (self.k * self.slab_thickness) ** 2 / 3.0
        return math.sin(self.k * self.slab_position) ** 2

    def electron_density(self, t):
        n_s = evaluate(self.surface_density, t)
        if np.any(np.asarray(n_s) < 0):
            raise ValueError("electron density must be non-negative")
        return np.asarray(n_s) / self.slab_thickness if np.ndim(n_s) else n_s / self.slab_thickness

    def plasma_mass_sq(self, t):
        return self.electron_density(t) * self.e2_over_m


def _epsilon_ratio(cfg, t):
    eps_t = np.asarray(evaluate(cfg.epsilon1, t), dtype=float)
    if np.any(eps_t == 0.0):
        raise SingularPermittivityError("epsilon1(t) = 0: permittivity is singular")
    return float(cfg.epsilon1(0.0)), eps_t


def plasma_displacements(cfg: SlabCavityConfig, t):
    """Effective wall displacements ``(delta_eps, delta_m)`` at time(s) ``t``.

    Thin-slab evaluation of the permittivity and conductivity integrals.
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    eps10, eps_t = _epsilon_ratio(cfg, t)
    w = cfg.mode_weight
    d_eps = -cfg.slab_thickness * (eps10 / cfg.epsilon0) * (1.0 - eps10 / eps_t) * w
    n_e = cfg.electron_density(t)
    d_m = cfg.slab_thickness * (n_e * cfg.e2_over_m / (cfg.epsilon0 * cfg.omega0**2)) * w
    if np.ndim(d_eps) == 0 and np.ndim(d_m) == 0:
        return float(d_eps), float(d_m)
    d_eps, d_m = np.broadcast_arrays(d_eps, d_m)
    return np.array(d_eps, dtype=float), np.array(d_m, dtype=float)


def initial_mode_function(cfg: SlabCavityConfig):
    """Normalised t = 0 mode function f0(x), piecewise across the slab.

    Returns a callable; normalisation is int eps(x,0) f0^2 dx = 1 / (2 omega0).
    """
    k, l, d, L = cfg.k, cfg.slab_position, cfg.slab_thickness, cfg.cavity_length
    w0 = cfg.omega0
    kp2 = float(cfg.epsilon1(0.0)) * w0**2 - cfg.k_perp**2
    s, c = math.sin(k * l), math.cos(k * l)

    if kp2 > 0:
        kp = math.sqrt(kp2)
        inside = lambda y: s * math.cos(kp * y) + k * c / kp * math.sin(kp * y)
        dinside = lambda y: -s * kp * math.sin(kp * y) + k * c * math.cos(kp * y)
    elif kp2 < 0:
        kp = math.sqrt(-kp2)
        inside = lambda y: s * math.cosh(kp * y) + k * c / kp * math.sinh(kp * y)
        dinside = lambda y: s * kp * math.sinh(kp * y) + k * c * math.cosh(kp * y)
    else:
        inside = lambda y: s + k * c * y
        dinside = lambda y: k * c
    f_out, df_out = inside(d), dinside(d)

    def raw(x):
        if x < l:
            return math.sin(k * x)
        if x <= l + d:
            return inside(x - l)
        y = x - l - d
        return f_out * math.cos(k * y) + df_out / k * math.sin(k * y)

    eps10 = float(cfg.epsilon1(0.0))
    norm = (
        cfg.epsilon0 * _quad.quad(lambda x: raw(x) ** 2, 0.0, l, limit=200)[0] if l > 0 else 0.0
    )
    norm += eps10 * _quad.quad(lambda x: raw(x) ** 2, l, l + d, limit=200)[0]
    norm += cfg.epsilon0 * _quad.quad(lambda x: raw(x) ** 2, l + d, L, limit=200)[0]
    scale = math.sqrt(1.0 / (2.0 * w0 * norm))
    return lambda x: scale * raw(x)


def plasma_displacements_quadrature(cfg: SlabCavityConfig, t: float):
    """Cross-check path: integrate G^eps, G^m over the slab with the exact t = 0 mode."""
    f0 = initial_mode_function(cfg)
    l, d = cfg.slab_position, cfg.slab_thickness
    overlap = _quad.quad(lambda x: f0(x) ** 2, l, l + d, limit=200)[0]
    eps10 = float(cfg.epsilon1(0.0))
    eps_t = float(cfg.epsilon1(t))
    if eps_t == 0.0:
        raise SingularPermittivityError("epsilon1(t) = 0: permittivity is singular")
    w0 = cfg.omega0
    g_eps = 0.5 * w0**2 * eps10**2 * (1.0 / eps_t - 1.0 / eps10) * overlap
    g_m = 0.5 * float(cfg.plasma_mass_sq(t)) * overlap
    # delta_omega = 2 (G_eps + G_m) = omega0 (delta_eps + delta_m) / L
    scale = 2.0 * cfg.cavity_length / w0
    return scale * g_eps, scale * g_m


def dispersion_check(cfg: SlabCavityConfig, t: float):
    """Return ``(omega_bar^2, k'^2)``; k'^2 < 0 (evanescent slab field) is legal."""
    omega_sq = (cfg.k**2 + cfg.k_perp**2) / cfg.epsilon0
    kprime_sq = float(cfg.epsilon1(t)) * omega_sq - cfg.k_perp**2 - float(cfg.plasma_mass_sq(t))
    return omega_sq, kprime_sq


# -- coupling schedule ------------------------------------------------------

@dataclass(frozen=True)
class CouplingSchedule:
    """Time-dependent coefficients of the field Hamiltonian.

    ``omega0`` is a float (single mode) or a 1-D array (multimode).  For
    multimode schedules ``delta_omega`` returns shape ``(..., n)``, ``g``
    returns ``(..., n, n)`` (symmetric) or ``(..., n)`` (diagonal), and the
    optional ``mu`` returns a Hermitian ``(..., n, n)`` with zero diagonal.
    """

    omega0: float | np.ndarray
    delta_omega: Callable
    g: Callable
    mu: Optional[Callable] = None
    formulation: Formulation = Formulation.CANONICAL
    drive_frequency: Optional[float] = None

    @property
    def n_modes(self) -> int:
        return int(np.size(self.omega0))

    @property
    def multimode(self) -> bool:
        return np.ndim(self.omega0) > 0

    @property
    def drive_period(self) -> float:
        if self.drive_frequency:
            return 2.0 * math.pi / self.drive_frequency
        # parametric resonance sits near twice the highest mode frequency
        return math.pi / float(np.max(self.omega0))

    def omega(self, t):
        return np.asarray(self.omega0) + evaluate(self.delta_omega, t)

    def coefficients(self, t):
        """Sample ``(W, G)`` on the array ``t``.

        Single mode: ``W`` real, ``G`` complex, both shaped like ``t``.
        Multimode: ``W = diag(omega) + mu`` and ``G``, shaped ``t.shape + (n, n)``.
        """
        t = np.asarray(t, dtype=float)
        if not self.multimode:
            w = float(self.omega0) + np.asarray(evaluate(self.delta_omega, t), dtype=float)
            g = np.asarray(evaluate(self.g, t), dtype=complex)
            return np.broadcast_to(w, t.shape).copy(), np.broadcast_to(g, t.shape).copy()
        n = self.n_modes
        omega = np.asarray(self.omega0, dtype=float) + np.asarray(
            evaluate(self.delta_omega, t), dtype=float
        )
        omega = np.broadcast_to(omega, t.shape + (n,))
        W = np.zeros(t.shape + (n, n), dtype=complex)
        idx = np.arange(n)
        W[..., idx, idx] = omega
        if self.mu is not None:
            mu = np.asarray(evaluate(self.mu, t), dtype=complex)
            if np.any(np.abs(np.diagonal(mu, axis1=-2, axis2=-1)) > 0):
                raise ValueError("intermode coupling mu must have a zero diagonal")
            if not np.allclose(mu, np.conj(np.swapaxes(mu, -1, -2)), rtol=1e-12, atol=1e-15):
                raise ValueError("intermode coupling mu must be Hermitian")
            W = W + mu
        g = np.asarray(evaluate(self.g, t), dtype=complex)
        if g.ndim == t.ndim + 1:
            G = np.zeros(t.shape + (n, n), dtype=complex)
            G[..., idx, idx] = np.broadcast_to(g, t.shape + (n,))
        else:
            G = np.broadcast_to(g, t.shape + (n, n)).copy()
            if not np.allclose(G, np.swapaxes(G, -1, -2), rtol=1e-12, atol=1e-15):
                raise ValueError("squeezing coupling g must be symmetric")
        return W, G


def default_schedule(
    omega0: float,
    mean_delta_omega: float,
    two_g: complex,
    Omega: float,
) -> CouplingSchedule:
    """omega(t) = omega0 + <dw>(1 - cos Omega t),  g(t) = 2<g>_Omega (1 - cos Omega t)."""
    return CouplingSchedule(
        omega0=omega0,
        delta_omega=RaisedCosine(mean_delta_omega, Omega),
        g=RaisedCosine(complex(two_g), Omega),
        drive_frequency=Omega,
    )


@dataclass(frozen=True)
class _SlabShift:
    cfg: SlabCavityConfig

    def __call__(self, t):
        d_eps, d_m = plasma_displacements(self.cfg, t)
        return self.cfg.omega0 * (np.asarray(d_eps) + d_m) / self.cfg.cavity_length


@dataclass(frozen=True)
class _SlabSqueeze:
    cfg: SlabCavityConfig

    def __call__(self, t):
        d_eps, d_m = plasma_displacements(self.cfg, t)
        return -0.5j * self.cfg.omega0 * (-np.asarray(d_eps) + d_m) / self.cfg.cavity_length


def coupling_schedule(cfg: SlabCavityConfig, drive_frequency: Optional[float] = None) -> CouplingSchedule:
    """Canonical-basis schedule of the slab mode.

    delta_omega(t) = omega0 (d_eps + d_m) / L,  g(t) = -(i/2) omega0 (-d_eps + d_m) / L.
    """
    return CouplingSchedule(
        omega0=cfg.omega0,
        delta_omega=_SlabShift(cfg),
        g=_SlabSqueeze(cfg),
        drive_frequency=drive_frequency,
    )


@dataclass(frozen=True)
class _InstantaneousSqueeze:
    source: CouplingSchedule
    step: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        h = self.step
        g = self.source.g
        near_origin = t < h
        t_c = np.where(near_origin, t + h, t)
        centred = (np.asarray(evaluate(g, t_c + h)) - np.asarray(evaluate(g, t_c - h))) / (2 * h)
        if np.any(near_origin):
            forward = (
                -3.0 * np.asarray(evaluate(g, t))
                + 4.0 * np.asarray(evaluate(g, t + h))
                - np.asarray(evaluate(g, t + 2 * h))
            ) / (2 * h)
            mask = near_origin.reshape(near_origin.shape + (1,) * (np.ndim(centred) - t.ndim))
            gdot = np.where(mask, forward, centred)
        else:
            gdot = centred
        omega = np.asarray(self.source.omega(t))
        if np.ndim(gdot) > np.ndim(omega) and self.source.multimode:
            # matrix g: symmetric generalisation i gdot_ab / (omega_a + omega_b)
            pair = omega[..., :, None] + omega[..., None, :]
            out = 1j * gdot / pair
        else:
            out = 1j * gdot / (2.0 * omega)
        if np.ndim(out) == 0:
            return complex(out)
        return out


def to_instantaneous(schedule: CouplingSchedule) -> CouplingSchedule:
    """Instantaneous-mode counterpart: same frequency shift, g_bar = (i / 2 omega_bar) dg/dt.

    dg/dt by centred finite difference with step 1e-4 of the drive period.
    """
    if schedule.formulation is not Formulation.CANONICAL:
        raise FormulationError("to_instantaneous expects a canonical schedule")
    step = 1e-4 * schedule.drive_period
    return CouplingSchedule(
        omega0=schedule.omega0,
        delta_omega=schedule.delta_omega,
        g=_InstantaneousSqueeze(schedule, step),
        mu=schedule.mu,
        formulation=Formulation.INSTANTANEOUS,
        drive_frequency=schedule.drive_frequency,
    )
