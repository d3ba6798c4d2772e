"""Rydberg-atom detection of the created photons.

N_Ryd two-level atoms at one position couple collectively to the resonant
mode with strength kappa_bar = kappa sqrt(N_Ryd).  Rates are in whatever
unit ``omega0`` is given in (s^-1 for the laboratory defaults below).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import constants
from scipy.integrate import solve_ivp

from .squeezing import CavityLoss

OMEGA0_SI = 1.5e10  # s^-1, 2.4 GHz x 2 pi
LINEAR_REGIME_FRACTION = 0.1
SERIES_CUTOFF = 1e-4


class LinearRegimeWarning(UserWarning):
    pass


class Regime(enum.Enum):
    MANY_PHOTONS = "many_photons"
    FEW_PHOTONS = "few_photons"


def kappa_from_dipole(dipole: float, volume: float, omega0: float, mode_ratio: float = 1.0) -> float:
    """Single atom-photon coupling (s^-1) from a dipole element (C m) and cavity volume (m^3).

    ``mode_ratio`` is |f0(x_atom)| / |f0(x_antinode)|.
    """
    e_vac = math.sqrt(constants.hbar * omega0 / (2.0 * constants.epsilon_0 * volume))
    return dipole * e_vac / constants.hbar * mode_ratio


@dataclass(frozen=True)
class AtomFieldParams:
    kappa: float
    n_ryd: int
    omega_e: float
    omega0: float
    transit: float
    loss: CavityLoss
    delta_e: float = field(init=False)

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if int(self.n_ryd) != self.n_ryd or self.n_ryd < 1:
            raise ValueError("n_ryd must be a positive integer")
        if not self.transit > 0:
            raise ValueError("transit time must be positive")
        if not math.isclose(self.loss.omega0, self.omega0, rel_tol=1e-12):
            raise ValueError("cavity loss must refer to the same omega0")
        object.__setattr__(self, "n_ryd", int(self.n_ryd))
        object.__setattr__(self, "delta_e", self.omega_e - self.omega0)

    @classmethod
    def laboratory(
        cls,
        kappa: float = 3e3,
        n_ryd: int = 1000,
        Q: float = 5e3,
        transit_rate: Optional[float] = None,
        delta_e: float = 0.0,
        omega0: float = OMEGA0_SI,
    ) -> "AtomFieldParams":
        """Parameters in s^-1; transit rate defaults to kappa (300 m/s across 0.1 m)."""
        rate = kappa if transit_rate is None else transit_rate
        return cls(kappa, n_ryd, omega0 + delta_e, omega0, 1.0 / rate, CavityLoss(Q, omega0))

    @property
    def kappa_bar(self) -> float:
        return self.kappa * math.sqrt(self.n_ryd)

    @property
    def transit_rate(self) -> float:
        return 1.0 / self.transit

    @property
    def Gamma(self) -> float:
        return self.loss.Gamma


def excitation_linear(params: AtomFieldParams, n_gamma: float, t):
    """Perturbative excited-atom count n (2 kb / De)^2 sin^2(De t / 2), t measured from t1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    kb, de = params.kappa_bar, params.delta_e
    x = np.abs(de) * t
    series = n_gamma * kb**2 * t**2 * (1.0 - x**2 / 12.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = n_gamma * (2.0 * kb / de) ** 2 * np.sin(0.5 * de * t) ** 2 if de != 0 else series
    out = np.where(x < SERIES_CUTOFF, series, exact)
    if np.any(out > LINEAR_REGIME_FRACTION * params.n_ryd):
        warnings.warn(
            "excitation exceeds 10% of the atoms; the linear result is no longer reliable",
            LinearRegimeWarning,
            stacklevel=2,
        )
    return float(out) if out.ndim == 0 else out


def linearized_excitation(params: AtomFieldParams, n_gamma: float, t, rtol: float = 1e-10):
    """Excitation from numerically integrating the linear (a, D-) equations.

    D- is treated as a bosonic mode ([D-, D+] ~ 1 for few excitations); in
    the frame rotating at omega0:  a' = -i kb D,  D' = -i De D - i kb a.
    N_e = n_gamma |u(t)|^2 where u is the D amplitude seeded by a(t1) = 1.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    kb, de = params.kappa_bar, params.delta_e

    def rhs(_, y):
        a, d = y
        return [-1j * kb * d, -1j * de * d - 1j * kb * a]

    order = np.argsort(t)
    t_sorted = t[order]
    sol = solve_ivp(
        rhs, (0.0, float(t_sorted[-1])), [1.0 + 0j, 0j], t_eval=t_sorted,
        method="DOP853", rtol=rtol, atol=1e-14,
    )
    out = np.empty_like(t)
    out[order] = n_gamma * np.abs(sol.y[1]) ** 2
    return out


def rabi_rate(params: AtomFieldParams, n_gamma: float) -> Tuple[float, Regime]:
    """kappa sqrt(n) when photons outnumber atoms, else the collective kappa_bar."""
    if n_gamma < 0:
        raise ValueError("n_gamma must be non-negative")
    if n_gamma == 0:
        return 0.0, Regime.FEW_PHOTONS
    if n_gamma >= params.n_ryd:
        return params.kappa * math.sqrt(n_gamma), Regime.MANY_PHOTONS
    return params.kappa_bar, Regime.FEW_PHOTONS


def relaxation_branch(params: AtomFieldParams) -> str:
    if params.Gamma == 0.0:
        return "lossless"
    return "quadratic" if params.kappa_bar < params.Gamma / 4.0 else "saturated"


def relaxation_rate(params: AtomFieldParams) -> float:
    """Decay of the atomic excitation through the lossy cavity."""
    gamma = params.Gamma
    if gamma == 0.0:
        return 0.0
    kb = params.kappa_bar
    if kb < gamma / 4.0:
        return 4.0 * (kb / gamma) ** 2 * gamma
    return gamma / 2.0


def excitation_during_dce(params: AtomFieldParams, n_gamma_t):
    """Atoms injected during the drive follow (kappa_bar / omega0)^2 n_gamma(t), capped at N_Ryd."""
    n = np.asarray(n_gamma_t, dtype=float)
    out = np.clip((params.kappa_bar / params.omega0) ** 2 * n, 0.0, params.n_ryd)
    return float(out) if out.ndim == 0 else out


# -- feasibility report ------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    name: str
    text: str
    lhs: float
    rhs: float
    relation: str  # ">~" or "<~"
    slack: float = 1.0

    @property
    def passed(self) -> bool:
        if self.relation == ">~":
            return self.lhs * self.slack >= self.rhs
        return self.lhs <= self.rhs * self.slack

    def row(self):
        return [self.name, self.text, self.lhs, self.rhs, self.slack, self.passed]


CONDITION_COLUMNS = ["name", "inequality", "lhs", "rhs", "slack", "passed"]


@dataclass(frozen=True)
class DetectionReport:
    rabi_rate: float
    relax_rate: float
    n_e_at_transit: float
    regime: Regime
    conditions: List[Condition]
    q_window: Optional[Tuple[float, float]]
    q_high_branch: float
    q_quadratic_window: Tuple[float, float]
    relax_branch: str
    kappa_bar: float
    Gamma: float
    transit_rate: float
    window_consistent: bool
    n_gamma: float
    notes: List[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        d["conditions"] = [dict(zip(CONDITION_COLUMNS, c.row()), relation=c.relation) for c in self.conditions]
        d["all_passed"] = self.all_passed
        return d


def q_bounds(params: AtomFieldParams, n_gamma: float):
    """Quadratic-branch window (Q_min, Q_max) and the saturated-branch bound omega0 / Gamma_tr."""
    w_k = params.omega0 / params.kappa
    q_min = w_k / math.sqrt(n_gamma) if n_gamma > 0 else math.inf
    q_max = w_k * (params.transit_rate / params.kappa) / params.n_ryd
    return q_min, q_max, params.omega0 / params.transit_rate


def feasibility(params: AtomFieldParams, n_gamma: float, slack: float = 1.0) -> DetectionReport:
    """Evaluate the detection conditions for ``n_gamma`` created photons.

    Every "~" inequality is order-of-magnitude; ``slack`` relaxes it
    multiplicatively and is recorded on each condition.
    """
    if n_gamma < 0:
        raise ValueError("n_gamma must be non-negative")
    omega_e, regime = rabi_rate(params, n_gamma)
    gamma = params.Gamma
    gamma_tr = params.transit_rate
    gamma_e = relaxation_rate(params)
    branch = relaxation_branch(params)
    q_min, q_max, q_high = q_bounds(params, n_gamma)
    Q = params.loss.Q

    conditions = [
        Condition("rabi_vs_loss", "Omega_e >~ Gamma", omega_e, gamma, ">~", slack),
        Condition("rabi_vs_transit", "Omega_e >~ Gamma_tr", omega_e, gamma_tr, ">~", slack),
    ]
    # Gamma_tr >~ Gamma_e is applied through the Q bound it implies in each branch
    if branch == "saturated":
        conditions.append(
            Condition("transit_vs_relax", "Gamma_tr >~ Gamma_e  <=>  Q >~ omega0/Gamma_tr", Q, q_high, ">~", slack)
        )
        q_window = (max(q_min, q_high), math.inf) if math.isfinite(q_min) else None
    elif branch == "lossless":
        conditions.append(Condition("transit_vs_relax", "Gamma_tr >~ Gamma_e = 0", gamma_tr, 0.0, ">~", slack))
        q_window = (q_min, math.inf) if math.isfinite(q_min) else None
    else:
        conditions.append(
            Condition(
                "transit_vs_relax",
                "Gamma_tr >~ Gamma_e  <=>  Q <~ (omega0/kappa)(Gamma_tr/kappa)/N_Ryd",
                Q, q_max, "<~", slack,
            )
        )
        q_window = (q_min, q_max) if q_min <= q_max else None
    conditions.append(
        Condition(
            "photon_requirement",
            "n_gamma >~ (kappa/Gamma_tr)^2 N_Ryd^2",
            n_gamma,
            (params.kappa / gamma_tr) ** 2 * params.n_ryd**2,
            ">~",
            slack,
        )
    )

    n_e = params.n_ryd / 2.0 if n_gamma >= params.n_ryd else n_gamma / 2.0
    kb = params.kappa_bar
    if branch == "quadratic":
        window_consistent = kb < params.omega0 / (4.0 * q_max)
    elif branch == "saturated":
        window_consistent = kb >= params.omega0 / (4.0 * q_high)
    else:
        window_consistent = True
    notes = [
        "all inequalities are order-of-magnitude estimates",
        "regime switch at n_gamma = N_Ryd is a convention",
        "q_window is None when the bounds leave no admissible Q",
        f"Gamma_e = {gamma_e:.6g} ({branch} branch), Gamma_tr / Gamma_e = "
        + (f"{gamma_tr / gamma_e:.6g}" if gamma_e > 0 else "inf"),
    ]
    return DetectionReport(
        rabi_rate=omega_e,
        relax_rate=gamma_e,
        n_e_at_transit=n_e,
        regime=regime,
        conditions=conditions,
        q_window=q_window,
        q_high_branch=q_high,
        q_quadratic_window=(q_min, q_max),
        relax_branch=branch,
        kappa_bar=kb,
        Gamma=gamma,
        transit_rate=gamma_tr,
        window_consistent=bool(window_consistent),
        n_gamma=float(n_gamma),
        notes=notes,
    )
