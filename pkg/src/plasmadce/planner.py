"""Experiment planning: from a photon-count target and laser budget to a detection verdict.

All drive quantities are in units of omega0 (chi/omega0, delta_omega/omega0);
detection rates stay in the absolute units of the :class:`AtomFieldParams`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .cavity_modes import SlabCavityConfig, check_frequency_shift, coupling_schedule, plasma_displacements
from .detection import AtomFieldParams, DetectionReport, feasibility
from .squeezing import CavityLoss, DriveSpec, dce_threshold, integrate, resonance_frequency

REFERENCE_ENERGY = 0.01  # uJ per pulse
REFERENCE_SHIFT = 0.1  # delta_omega / omega0 at the reference energy
REFERENCE_CHI = 0.01  # chi / omega0 at the reference energy and r_omega
REFERENCE_R = 0.1
RELAXATION_WAIT = 1e-2  # s, field back to vacuum before the next round
PROFILE_SAMPLES = 2048


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class PlanInput:
    """Planning targets and hardware.

    ``laser_energy`` (uJ per pulse) selects the scaling-law chain and
    ``slab_cavity`` the first-principles one; either or both may be given.
    ``atoms`` defaults to the laboratory parameters of :mod:`detection`.
    """

    target_n_gamma: float
    n_pulses: int
    laser_energy: Optional[float] = None
    r_omega: float = REFERENCE_R
    slab_cavity: Optional[SlabCavityConfig] = None
    atoms: Optional[AtomFieldParams] = None
    drive_frequency: Optional[float] = None
    slack: float = 1.0

    def __post_init__(self):
        if not self.target_n_gamma > 0:
            raise ValueError("target_n_gamma must be positive")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError("n_pulses must be a positive integer")
        if self.laser_energy is not None and self.laser_energy < 0:
            raise ValueError("laser_energy must be non-negative")
        if not 0.0 < self.r_omega <= 1.0:
            raise ValueError("r_omega must lie in (0, 1]")
        if not self.slack > 0:
            raise ValueError("slack must be positive")
        object.__setattr__(self, "n_pulses", int(self.n_pulses))
        if self.atoms is None:
            object.__setattr__(self, "atoms", AtomFieldParams.laboratory())


@dataclass(frozen=True)
class ChiChain:
    delta_m_over_L: float
    delta_omega: float
    chi: float
    source: str


@dataclass(frozen=True)
class PlanReport:
    required_chi_over_omega0: float
    achieved_delta_m_over_L: float
    achieved_delta_omega: float
    achieved_chi: float
    chain_source: str
    predicted_n_gamma: float
    t1_planning: float
    t1_drive: float
    resonance_Omega: float
    threshold_ok: bool
    detection: DetectionReport
    scaling_chain: Optional[ChiChain] = None
    slab_chain: Optional[ChiChain] = None
    chain_ratio: Optional[float] = None
    simulated_n_gamma: Optional[float] = None
    relaxation_wait: float = RELAXATION_WAIT
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detection"] = self.detection.to_dict()
        return d


def required_squeezing_rate(target_n_gamma: float, n_pulses: int) -> float:
    """chi / omega0 needed for 1/4 exp(2 pi N chi / omega0) = n_gamma."""
    if target_n_gamma <= 0.25:
        raise ValueError("target_n_gamma must exceed 1/4; no squeezing is needed below that")
    if n_pulses < 1:
        raise ValueError("n_pulses must be at least 1")
    return math.log(4.0 * target_n_gamma) / (2.0 * math.pi * n_pulses)


def predicted_photon_number(chi: float, n_pulses: int) -> float:
    """Planning estimate 1/4 exp(2 chi t1) with t1 = pi N_pulse / omega0."""
    return 0.25 * math.exp(2.0 * math.pi * n_pulses * chi)


def scaling_chain(laser_energy: float, r_omega: float = REFERENCE_R) -> ChiChain:
    """Order-of-magnitude laser-energy scaling (linear in W and in r_omega)."""
    w = laser_energy / REFERENCE_ENERGY
    shift = REFERENCE_SHIFT * w
    chi = REFERENCE_CHI * (r_omega / REFERENCE_R) * w
    return ChiChain(delta_m_over_L=shift, delta_omega=shift, chi=chi, source="scaling")


def slab_chain(cfg: SlabCavityConfig, drive_frequency: Optional[float] = None) -> ChiChain:
    """Period averages of delta_m / L and delta_omega, and |2<g>_Omega|, from the slab model.

    ``drive_frequency`` is in the slab's own units and defaults to 2 omega0.
    """
    w0 = cfg.omega0
    Omega = 2.0 * w0 if drive_frequency is None else drive_frequency
    t = np.arange(PROFILE_SAMPLES) * (2.0 * math.pi / Omega / PROFILE_SAMPLES)
    _, d_m = plasma_displacements(cfg, t)
    drive = DriveSpec.from_schedule(coupling_schedule(cfg, Omega), Omega, samples=PROFILE_SAMPLES)
    return ChiChain(
        delta_m_over_L=float(np.mean(d_m)) / cfg.cavity_length,
        delta_omega=drive.mean_delta_omega / w0,
        chi=drive.coupling / w0,
        source="slab",
    )


def power_to_chi(inp: PlanInput):
    """Return ``(delta_m/L, delta_omega/omega0, chi/omega0)`` from the configured chain.

    The slab model wins when both are available; :func:`plan` reports both.
    """
    chains = _chains(inp)
    primary = chains["slab"] or chains["scaling"]
    check_frequency_shift(primary.delta_omega, 1.0)
    return primary.delta_m_over_L, primary.delta_omega, primary.chi


def _chains(inp: PlanInput):
    if inp.laser_energy is None and inp.slab_cavity is None:
        raise ConfigurationError("either laser_energy or slab_cavity must be given")
    return {
        "scaling": None if inp.laser_energy is None else scaling_chain(inp.laser_energy, inp.r_omega),
        "slab": None if inp.slab_cavity is None else slab_chain(inp.slab_cavity, inp.drive_frequency),
    }


def plan(inp: PlanInput, simulate: bool = False) -> PlanReport:
    """Compose the required rate, the achieved chain, threshold and detection into one report.

    With ``simulate`` the Bogoliubov equations are integrated over the
    pulse train for a reference value next to the exponential estimate.
    """
    required = required_squeezing_rate(inp.target_n_gamma, inp.n_pulses)
    chains = _chains(inp)
    primary = chains["slab"] or chains["scaling"]
    check_frequency_shift(primary.delta_omega, 1.0)
    ratio = None
    if chains["slab"] is not None and chains["scaling"] is not None and chains["scaling"].chi > 0:
        ratio = chains["slab"].chi / chains["scaling"].chi

    chi = primary.chi
    n_pred = predicted_photon_number(chi, inp.n_pulses)
    Omega = resonance_frequency(1.0, primary.delta_omega)
    drive = DriveSpec(1.0, primary.delta_omega, 0.5j * chi, 0.0, inp.n_pulses)
    atoms = inp.atoms
    threshold = dce_threshold(drive, CavityLoss(atoms.loss.Q, 1.0))
    detection = feasibility(atoms, n_pred, slack=inp.slack)

    simulated = None
    if simulate:
        traj = integrate(drive.schedule(), drive.t1)
        simulated = float(traj.photon_number()[-1])

    gamma = atoms.Gamma
    notes = [
        "predicted n_gamma uses t1 = pi N_pulse / omega0 (planning form)",
        f"drive duration N_pulse 2 pi / Omega = {drive.t1:.6g} / omega0",
        f"repeat cycle: wait {RELAXATION_WAIT:g} s; 1/Gamma = "
        + (f"{1.0 / gamma:.3g} s" if gamma > 0 else "inf")
        + f", t_tr = {atoms.transit:.3g} s",
    ]
    if not threshold:
        notes.append("squeezing rate does not exceed Gamma/2: no net photon creation")
    return PlanReport(
        required_chi_over_omega0=required,
        achieved_delta_m_over_L=primary.delta_m_over_L,
        achieved_delta_omega=primary.delta_omega,
        achieved_chi=chi,
        chain_source=primary.source,
        predicted_n_gamma=n_pred,
        t1_planning=math.pi * inp.n_pulses,
        t1_drive=drive.t1,
        resonance_Omega=Omega,
        threshold_ok=bool(threshold),
        detection=detection,
        scaling_chain=chains["scaling"],
        slab_chain=chains["slab"],
        chain_ratio=ratio,
        simulated_n_gamma=simulated,
        notes=notes,
    )
