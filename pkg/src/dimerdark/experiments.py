"""Population dynamics, dark-state scans and static-disorder ensembles."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .bath import BathSpec, gamma
from .dynamics import PopulationTrajectory, build_rate_matrix, dark_report, evolve
from .eigen import diag_case_b, diag_case_c, diagonalize
from .errors import DegenerateSpectrumError, PreconditionError
from .model import HBAR_EV_S, DimerConfig, assemble_site_hamiltonian, make_dimer, site_dipole_matrix

DEGENERACY_TOL = 1e-12


# -- population dynamics ---------------------------------------------------


def log_times(t_min_s: float, t_max_s: float, points: int) -> np.ndarray:
    """Logarithmic grid in hbar/eV between two times given in seconds."""
    if not 0 < t_min_s < t_max_s or points < 2:
        raise PreconditionError("need 0 < t_min < t_max and at least two points")
    return np.geomspace(t_min_s, t_max_s, points) / HBAR_EV_S


def run_population_study(
    cfg: DimerConfig,
    spec: BathSpec,
    initial=(0.0, 0.0, 1.0),
    t_min_s: float = 1e-12,
    t_max_s: float = 10.0,
    points: int = 200,
    case: str = "a",
) -> PopulationTrajectory:
    es = diagonalize(cfg, case)
    rm = build_rate_matrix(es, spec)
    return evolve(rm, initial, log_times(t_min_s, t_max_s, points))


# -- dark-state scan -------------------------------------------------------


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise PreconditionError("direction vectors must be nonzero")
    return v / n


@dataclass(frozen=True)
class DarkScanTemplate:
    """Degenerate monomers with indirect coupling; |Delta| is scanned along fixed directions."""

    epsilon: float = 2.5
    mu1: tuple = (2.0, 0.0, 0.0)
    mu2: tuple = (-2.0, 0.0, 0.0)
    delta_dir1: tuple = (1.0, 0.0, 0.0)
    delta_dir2: tuple = (-1.0, 0.0, 0.0)

    def config(self, q01: float, q02: float, delta: float) -> DimerConfig:
        return make_dimer(
            self.epsilon,
            self.epsilon,
            mu1=self.mu1,
            mu2=self.mu2,
            delta1=delta * _unit(self.delta_dir1),
            delta2=delta * _unit(self.delta_dir2),
            q01=q01,
            q02=q02,
        )


@dataclass(frozen=True)
class ScanGrid:
    q01: np.ndarray
    delta: np.ndarray
    q02: np.ndarray
    threshold: float
    # shape (len(q02), len(q01), len(delta), 2): excited states 1 and 2
    dipole_sq: np.ndarray
    relative: np.ndarray
    dark: np.ndarray

    @property
    def cells(self) -> int:
        return self.dark.shape[0] * self.dark.shape[1] * self.dark.shape[2]

    def rows(self):
        for k, q02 in enumerate(self.q02):
            for i, q01 in enumerate(self.q01):
                for j, dl in enumerate(self.delta):
                    yield (
                        float(q02), float(q01), float(dl),
                        *(float(x) for x in self.dipole_sq[k, i, j]),
                        *(float(x) for x in self.relative[k, i, j]),
                        *(bool(x) for x in self.dark[k, i, j]),
                    )


def _check_axis(name, values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) == 0 or np.any(np.diff(v) <= 0):
        raise PreconditionError(f"axis {name} must be non-empty and strictly increasing")
    return v


def run_dark_scan(
    template: DarkScanTemplate,
    q01_values,
    delta_values,
    q02_values=(0.0,),
    threshold: float = 1e-6,
) -> ScanGrid:
    q01 = _check_axis("q01", q01_values)
    delta = _check_axis("delta", delta_values)
    q02 = _check_axis("q02", q02_values)
    shape = (len(q02), len(q01), len(delta), 2)
    dsq = np.full(shape, np.nan)
    rel = np.full(shape, np.nan)
    dark = np.zeros(shape, dtype=bool)
    for k, b in enumerate(q02):
        for i, a in enumerate(q01):
            for j, dl in enumerate(delta):
                try:
                    es = diag_case_b(template.config(a, b, dl))
                except DegenerateSpectrumError:
                    continue
                rep = dark_report(es, threshold)
                dsq[k, i, j] = rep.dipole_sq
                rel[k, i, j] = rep.relative
                dark[k, i, j] = rep.dark
    return ScanGrid(q01, delta, q02, threshold, dsq, rel, dark)


def localized_dark_delta(epsilon: float, q01: float, mu) -> np.ndarray:
    """Change of permanent dipole that darkens the state localized on monomer 1 when Q02 = 0."""
    return epsilon * np.asarray(mu, dtype=float) / q01


def all_dark_delta_sum(epsilon: float, qg: float, qx: float, mu_sum) -> np.ndarray:
    """Delta1 + Delta2 that zeroes every ground-manifold transition of the symmetric mixed dimer."""
    return (epsilon + qx) * np.asarray(mu_sum, dtype=float) / qg


# -- disorder ensemble -----------------------------------------------------


def mixed_couplings(ratio: float, epsilon: float, splitting: float) -> tuple[float, float]:
    """Q_G >= 0 and Q_X giving the requested excited-state splitting.

    ``ratio`` is Q_G / (Q_G + Q_X); it equals Q_G / (|Q_G| + |Q_X|) on [0, 1]
    and continues past 1 with Q_X < 0.
    """
    if ratio < 0:
        raise PreconditionError("ratio must be non-negative")
    if splitting <= 0:
        raise PreconditionError("splitting must be positive")
    if ratio == 0:
        return 0.0, splitting / 2
    k = (1 - ratio) / ratio

    def gap(qg):
        a = epsilon + k * qg
        return 0.5 * (a + math.sqrt(8 * qg * qg + a * a)) - (epsilon - k * qg) - splitting

    hi = max(splitting, 1e-3)
    while gap(hi) <= 0:
        hi *= 2
        if hi > 1e3 * epsilon:
            raise PreconditionError(f"no coupling reaches splitting {splitting} eV at ratio {ratio}")
    qg = optimize.brentq(gap, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return qg, k * qg


@dataclass(frozen=True)
class EnsembleSpec:
    epsilon: float = 2.4
    mu: float = 10.0
    splitting: float = 0.15
    sigma: float = 0.025
    samples: int = 1000
    master_seed: int = 0
    perturb_couplings: bool = False

    def __post_init__(self):
        if self.sigma < 0:
            raise PreconditionError("sigma must be non-negative")
        if self.samples < 1:
            raise PreconditionError("samples must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise PreconditionError("master_seed must fit in 64 bits")

    def base_config(self, ratio: float, delta: float) -> DimerConfig:
        qg, qx = mixed_couplings(ratio, self.epsilon, self.splitting)
        mu = (self.mu, 0.0, 0.0)
        dl = (delta, 0.0, 0.0)
        return make_dimer(
            self.epsilon, self.epsilon, mu1=mu, mu2=mu, delta1=dl, delta2=dl, q01=qg, q02=qg, q12=qx
        )


def sample_perturbation(master_seed: int, index: int, attempt: int, sigma: float) -> np.ndarray:
    """Gaussian shifts (eps1, eps2, Q01, Q02, Q12) for one sample.

    Drawn from a Philox stream keyed by the master seed with the sample index
    and redraw attempt in the counter, so a sample's draw does not depend on
    which worker evaluates it.
    """
    bitgen = np.random.Philox(key=master_seed, counter=[0, 0, attempt, index])
    return np.random.Generator(bitgen).normal(0.0, sigma, size=5) if sigma else np.zeros(5)


@dataclass(frozen=True)
class EnsembleCell:
    ratio: float
    delta: float
    qg: float
    qx: float
    # columns: rate 1->0, 2->0, 2->1 (eV)
    rates: np.ndarray = field(repr=False)
    unperturbed: np.ndarray = field(repr=False)
    attempts: np.ndarray = field(repr=False)

    @property
    def mean(self) -> np.ndarray:
        return self.rates.mean(axis=0)

    @property
    def stderr(self) -> np.ndarray:
        n = self.rates.shape[0]
        if n < 2:
            return np.zeros(3)
        return self.rates.std(axis=0, ddof=1) / math.sqrt(n)

    @property
    def redraws(self) -> int:
        return int(self.attempts.sum())


@dataclass(frozen=True)
class EnsembleStats:
    spec: EnsembleSpec
    bath: BathSpec
    ratios: np.ndarray
    deltas: np.ndarray
    cells: tuple  # cells[i][j] for ratio i, delta j

    def mean_rates(self) -> np.ndarray:
        return np.array([[c.mean for c in row] for row in self.cells])

    def cell(self, ratio_index: int, delta_index: int) -> EnsembleCell:
        return self.cells[ratio_index][delta_index]


def _downhill_rates(energies: np.ndarray, dipoles: np.ndarray, bath: BathSpec) -> np.ndarray:
    pairs = ((1, 0), (2, 0), (2, 1))
    out = np.empty((energies.shape[0], 3))
    for col, (hi, lo) in enumerate(pairs):
        d = dipoles[:, hi, lo]
        out[:, col] = np.einsum("nx,nx->n", d, d) * gamma(energies[:, hi] - energies[:, lo], bath)
    return out


def _ensemble_row(spec: EnsembleSpec, bath: BathSpec, ratio: float, deltas, draws) -> list[EnsembleCell]:
    qg, qx = mixed_couplings(ratio, spec.epsilon, spec.splitting)
    cfgs = [spec.base_config(ratio, dl) for dl in deltas]
    base_h = assemble_site_hamiltonian(cfgs[0]).h
    site_d = [site_dipole_matrix(c).d for c in cfgs]
    n = spec.samples
    cp = 1.0 if spec.perturb_couplings else 0.0

    def hamiltonians(z):
        h = np.broadcast_to(base_h, (len(z), 3, 3)).copy()
        h[:, 1, 1] += z[:, 0]
        h[:, 2, 2] += z[:, 1]
        h[:, 0, 1] += cp * z[:, 2]
        h[:, 1, 0] = h[:, 0, 1]
        h[:, 0, 2] += cp * z[:, 3]
        h[:, 2, 0] = h[:, 0, 2]
        h[:, 1, 2] += cp * z[:, 4]
        h[:, 2, 1] = h[:, 1, 2]
        return h

    z = draws.copy()
    attempts = np.zeros(n, dtype=int)
    while True:
        energies, vecs = np.linalg.eigh(hamiltonians(z))
        bad = np.flatnonzero(np.min(np.diff(energies, axis=1), axis=1) < DEGENERACY_TOL)
        if len(bad) == 0:
            break
        for i in bad:
            attempts[i] += 1
            z[i] = sample_perturbation(spec.master_seed, int(i), int(attempts[i]), spec.sigma)

    cells = []
    for j, dl in enumerate(deltas):
        # the unperturbed dimer has the mixed-coupling symmetry, so its dark state is exactly dark
        es0 = diag_case_c(cfgs[j])
        unpert = _downhill_rates(es0.energies[None], es0.dipoles[None], bath)[0]
        if spec.sigma == 0:
            rates = np.tile(unpert, (n, 1))
        else:
            dip = np.einsum("nsa,ntb,stx->nabx", vecs, vecs, site_d[j])
            rates = _downhill_rates(energies, dip, bath)
        for arr in (rates, unpert):
            arr.flags.writeable = False
        cells.append(EnsembleCell(float(ratio), float(dl), qg, qx, rates, unpert, attempts.copy()))
    return cells


def run_robustness_ensemble(
    spec: EnsembleSpec,
    bath: BathSpec,
    ratio_grid,
    delta_grid,
    threads: int = 1,
) -> EnsembleStats:
    ratios = np.asarray(ratio_grid, dtype=float)
    deltas = np.asarray(delta_grid, dtype=float)
    if ratios.ndim != 1 or deltas.ndim != 1 or len(ratios) == 0 or len(deltas) == 0:
        raise PreconditionError("ratio and delta grids must be non-empty 1-d sequences")
    draws = np.array(
        [sample_perturbation(spec.master_seed, i, 0, spec.sigma) for i in range(spec.samples)]
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda r: _ensemble_row(spec, bath, r, deltas, draws), ratios))
    else:
        rows = [_ensemble_row(spec, bath, r, deltas, draws) for r in ratios]
    return EnsembleStats(spec, bath, ratios, deltas, tuple(tuple(r) for r in rows))
