"""Monomer and dimer data types, unit conventions and site-basis assembly.

Energies are in eV, dipoles in Debye. Wherever a dipole enters a rate or an
energy it is used as the dimensionless number d / (1 Debye). Times are in
hbar/eV internally; :data:`HBAR_EV_S` converts to seconds.

Site basis order is (|0>, |1>, |2>): both monomers in the ground state,
monomer 1 excited, monomer 2 excited. The doubly excited state is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import PreconditionError

HBAR_EV_S = 6.582119569e-16
K_B_EV_PER_K = 8.617333262e-5
DEBYE_C_M = 1e-21 / constants.c


def _vec(v) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise PreconditionError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("dipole vector must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DipoleSet:
    """Transition dipole and the two permanent dipoles of one monomer (Debye)."""

    mu: np.ndarray = field(default_factory=lambda: np.zeros(3))
    perm_ground: np.ndarray = field(default_factory=lambda: np.zeros(3))
    perm_excited: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("mu", "perm_ground", "perm_excited"):
            object.__setattr__(self, name, _vec(getattr(self, name)))

    @property
    def delta(self) -> np.ndarray:
        """Change of permanent dipole on excitation."""
        return self.perm_excited - self.perm_ground

    def __eq__(self, other):
        if not isinstance(other, DipoleSet):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("mu", "perm_ground", "perm_excited")
        )

    __hash__ = None


@dataclass(frozen=True)
class Monomer:
    excitation_energy: float
    dipoles: DipoleSet = field(default_factory=DipoleSet)

    def __post_init__(self):
        if not (math.isfinite(self.excitation_energy) and self.excitation_energy > 0):
            raise PreconditionError("excitation_energy must be positive and finite")


_PAIRS = {"q00": (0, 0), "q11": (1, 1), "q22": (2, 2), "q01": (0, 1), "q02": (0, 2), "q12": (1, 2)}


@dataclass(frozen=True)
class CouplingMatrix:
    """Real symmetric electrostatic couplings Q_ab over the three site states (eV)."""

    q00: float = 0.0
    q11: float = 0.0
    q22: float = 0.0
    q01: float = 0.0
    q02: float = 0.0
    q12: float = 0.0

    def __post_init__(self):
        for name in _PAIRS:
            if not math.isfinite(getattr(self, name)):
                raise PreconditionError(f"coupling {name} must be finite")

    def matrix(self) -> np.ndarray:
        q = np.zeros((3, 3))
        for name, (a, b) in _PAIRS.items():
            q[a, b] = q[b, a] = getattr(self, name)
        return q

    @classmethod
    def from_matrix(cls, q) -> "CouplingMatrix":
        q = np.asarray(q, dtype=float)
        if q.shape != (3, 3) or not np.allclose(q, q.T, rtol=0, atol=0):
            raise PreconditionError("coupling matrix must be a symmetric 3x3 array")
        return cls(**{name: float(q[a, b]) for name, (a, b) in _PAIRS.items()})


def coupling_constant(refractive_index: float, cutoff_energy: float) -> float:
    """Dimensionless optical coupling S = n nu_c^2 |d_ref|^2 / (8 pi^2).

    The 1 Debye reference dipole is expressed in natural units
    (hbar = c = epsilon_0 = 1) with lengths in 1/eV.
    """
    hbar_c_ev_m = constants.hbar * constants.c / constants.e
    d_ref_m = DEBYE_C_M / math.sqrt(constants.epsilon_0 * constants.hbar * constants.c)
    d_ref = d_ref_m / hbar_c_ev_m
    return refractive_index * cutoff_energy**2 * d_ref**2 / (8 * math.pi**2)


@dataclass(frozen=True)
class DimerConfig:
    monomer1: Monomer
    monomer2: Monomer
    coupling: CouplingMatrix = field(default_factory=CouplingMatrix)
    include_self_dipole: bool = False
    cutoff_energy: float = 10.0
    coupling_constant: float | None = None
    refractive_index: float = 1.0
    lambda_override: float | None = None

    def __post_init__(self):
        if not self.cutoff_energy > 0:
            raise PreconditionError("cutoff_energy must be positive")
        if self.refractive_index <= 0:
            raise PreconditionError("refractive_index must be positive")
        if self.coupling_constant is None:
            object.__setattr__(
                self, "coupling_constant", coupling_constant(self.refractive_index, self.cutoff_energy)
            )
        if self.coupling_constant < 0:
            raise PreconditionError("coupling_constant must be non-negative")
        eps = self.bare_effective_energies()
        if not np.all(np.isfinite(eps)):
            raise PreconditionError("effective energies must be finite")

    def bare_effective_energies(self) -> tuple[float, float]:
        """eps_j = E_j + Q_jj - E_0 - Q_00 without any self-dipole shift."""
        c = self.coupling
        return (
            self.monomer1.excitation_energy + c.q11 - c.q00,
            self.monomer2.excitation_energy + c.q22 - c.q00,
        )


@dataclass(frozen=True)
class SiteHamiltonian:
    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.shape != (3, 3) or not np.array_equal(h, h.T):
            raise PreconditionError("site Hamiltonian must be a symmetric 3x3 matrix")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class SiteDipoleMatrix:
    """d[a, b] is the 3-vector <a|d1 + d2|b> in Debye; shape (3, 3, 3)."""

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.shape != (3, 3, 3) or not np.array_equal(d, d.transpose(1, 0, 2)):
            raise PreconditionError("dipole matrix must have shape (3, 3, 3) and be symmetric")
        d.flags.writeable = False
        object.__setattr__(self, "d", d)

    @property
    def transition_dipoles(self) -> tuple[np.ndarray, np.ndarray]:
        return self.d[0, 1], self.d[0, 2]


def site_dipole_matrix(cfg: DimerConfig) -> SiteDipoleMatrix:
    d1, d2 = cfg.monomer1.dipoles, cfg.monomer2.dipoles
    d = np.zeros((3, 3, 3))
    d[0, 0] = d1.perm_ground + d2.perm_ground
    d[1, 1] = d1.perm_excited + d2.perm_ground
    d[2, 2] = d1.perm_ground + d2.perm_excited
    d[0, 1] = d[1, 0] = d1.mu
    d[0, 2] = d[2, 0] = d2.mu
    return SiteDipoleMatrix(d)


def compute_lambda(cfg: DimerConfig) -> float:
    """Self-dipole strength lambda = 16 pi nu_c S / 3 in eV, unless overridden."""
    if cfg.lambda_override is not None:
        return float(cfg.lambda_override)
    return 16 * math.pi * cfg.cutoff_energy * cfg.coupling_constant / 3


def self_dipole_matrix(cfg: DimerConfig) -> np.ndarray:
    """lambda <a|(d1 + d2)^2|b> on the truncated three-state space, in eV."""
    d = site_dipole_matrix(cfg).d
    return compute_lambda(cfg) * np.einsum("acx,cbx->ab", d, d)


def self_dipole_shift(cfg: DimerConfig, a: int, b: int) -> float:
    if a not in (0, 1, 2) or b not in (0, 1, 2):
        raise PreconditionError("states must be 0, 1 or 2")
    return float(self_dipole_matrix(cfg)[a, b])


def effective_couplings(cfg: DimerConfig) -> np.ndarray:
    """Q' = Q + <a|V1|b> when the self-dipole term is switched on, else Q."""
    q = cfg.coupling.matrix()
    if cfg.include_self_dipole:
        q = q + self_dipole_matrix(cfg)
    return q


def effective_energies(cfg: DimerConfig) -> tuple[float, float]:
    q = effective_couplings(cfg)
    return (
        cfg.monomer1.excitation_energy + q[1, 1] - q[0, 0],
        cfg.monomer2.excitation_energy + q[2, 2] - q[0, 0],
    )


def assemble_site_hamiltonian(cfg: DimerConfig) -> SiteHamiltonian:
    q = effective_couplings(cfg)
    eps1, eps2 = effective_energies(cfg)
    h = np.array(
        [
            [0.0, q[0, 1], q[0, 2]],
            [q[0, 1], eps1, q[1, 2]],
            [q[0, 2], q[1, 2], eps2],
        ]
    )
    return SiteHamiltonian(h)


def make_dimer(
    eps1: float,
    eps2: float,
    *,
    mu1=(0, 0, 0),
    mu2=(0, 0, 0),
    delta1=(0, 0, 0),
    delta2=(0, 0, 0),
    ground1=(0, 0, 0),
    ground2=(0, 0, 0),
    q01: float = 0.0,
    q02: float = 0.0,
    q12: float = 0.0,
    **kwargs,
) -> DimerConfig:
    """Convenience constructor from effective energies and dipole changes.

    Permanent excited-state dipoles are set to ``ground + delta``.
    """
    g1, g2 = np.asarray(ground1, float), np.asarray(ground2, float)
    m1 = Monomer(eps1, DipoleSet(mu1, g1, g1 + np.asarray(delta1, float)))
    m2 = Monomer(eps2, DipoleSet(mu2, g2, g2 + np.asarray(delta2, float)))
    return DimerConfig(m1, m2, CouplingMatrix(q01=q01, q02=q02, q12=q12), **kwargs)
