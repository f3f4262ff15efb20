"""Secular Redfield population dynamics over the dimer eigenstates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components

from .bath import BathSpec, gamma
from .eigen import EigenSystem
from .errors import DegenerateSpectrumError, MultipleSteadyStatesError, NumericalError, PreconditionError

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class RateMatrix:
    """``rate[b, a]`` is the population transfer rate b -> a in eV (diagonal zero)."""

    rate: np.ndarray

    def __post_init__(self):
        r = np.array(self.rate, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise PreconditionError("rate matrix must be square")
        if np.any(r < 0):
            raise PreconditionError("rates must be non-negative")
        np.fill_diagonal(r, 0.0)
        r.flags.writeable = False
        object.__setattr__(self, "rate", r)

    @property
    def generator(self) -> np.ndarray:
        """G with d p/dt = G p; G[a, b] = rate(b -> a), columns sum to zero."""
        g = self.rate.T.copy()
        g[np.diag_indices_from(g)] = -self.rate.sum(axis=1)
        return g


@dataclass(frozen=True)
class PopulationTrajectory:
    times: np.ndarray
    populations: np.ndarray


@dataclass(frozen=True)
class DarkReport:
    dipole_sq: np.ndarray
    relative: np.ndarray
    dark: np.ndarray
    threshold: float


def build_rate_matrix(es: EigenSystem, spec: BathSpec) -> RateMatrix:
    """rate(b -> a) = |d_ab|^2 gamma(E_b - E_a); downhill moves use the emission branch."""
    e = es.energies
    dsq = es.dipole_sq()
    n = len(e)
    r = np.zeros((n, n))
    for b in range(n):
        for a in range(n):
            if a == b:
                continue
            w = e[b] - e[a]
            if abs(w) < DEGENERACY_TOL:
                raise DegenerateSpectrumError(
                    f"states {min(a, b)} and {max(a, b)} are degenerate (|dE| = {abs(w):.2e} eV); "
                    "the secular approximation does not apply",
                    pair=(min(a, b), max(a, b)),
                )
            r[b, a] = dsq[a, b] * gamma(w, spec)
    return RateMatrix(r)


def _propagator(g: np.ndarray):
    """Return t -> exp(G t), via eigendecomposition when it is well conditioned."""
    w, v = np.linalg.eig(g)
    # stationary modes come back as +-eps |G|; left alone they drift the total over long times
    w = np.where(np.abs(w) <= 8 * len(w) * np.finfo(float).eps * np.abs(g).max(), 0.0, w)
    cond = np.linalg.cond(v)
    if np.isfinite(cond) and cond < 1e8:
        vinv = np.linalg.inv(v)

        def prop(t):
            return (v * np.exp(w * t)) @ vinv

        return prop, cond * np.finfo(float).eps
    log.warning("rate generator is close to defective (cond %.1e); using scaled Pade series", cond)

    def prop(t):
        return linalg.expm(g * t)

    # scaling-and-squaring Pade is backward stable to about unit roundoff per squaring
    scale = max(np.abs(g).sum(axis=0).max(), 1e-300)
    return prop, np.finfo(float).eps * max(1.0, math.log2(scale * 1e12))


def evolve(rm: RateMatrix, initial, times) -> PopulationTrajectory:
    p0 = np.asarray(initial, dtype=float)
    if np.any(p0 < 0) or abs(p0.sum() - 1) > 1e-12:
        raise PreconditionError("initial populations must be non-negative and sum to 1")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise PreconditionError("times must be a 1-d ascending array")
    g = rm.generator
    prop, bound = _propagator(g)
    pops = np.empty((len(times), len(p0)))
    for i, t in enumerate(times):
        p = np.real(prop(t) @ p0)
        pops[i] = p
    if np.any(pops < -1e-9) or np.any(np.abs(pops.sum(axis=1) - 1) > 1e-9):
        raise NumericalError(f"population evolution lost accuracy (error bound {bound:.1e})")
    pops = np.clip(pops, 0.0, 1.0)
    return PopulationTrajectory(times, pops)


def closed_classes(rm: RateMatrix) -> list[tuple[int, ...]]:
    """Recurrent communicating classes of the rate graph (edges b -> a where rate > 0)."""
    adj = (rm.rate > 0).astype(int)
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    classes = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        outside = np.setdiff1d(np.arange(len(labels)), members)
        if not adj[np.ix_(members, outside)].any():
            classes.append(tuple(int(m) for m in members))
    return classes


def steady_state(rm: RateMatrix) -> np.ndarray:
    classes = closed_classes(rm)
    if len(classes) != 1:
        raise MultipleSteadyStatesError(
            f"rate graph has {len(classes)} closed components {classes}; steady state is not unique",
            components=classes,
        )
    g = rm.generator
    _, _, vh = np.linalg.svd(g)
    p = np.abs(vh[-1])
    return p / p.sum()


def gibbs_populations(energies, spec: BathSpec) -> np.ndarray:
    e = np.asarray(energies, dtype=float)
    if spec.temperature == 0:
        p = (e == e.min()).astype(float)
    else:
        p = np.exp(-spec.beta * (e - e.min()))
    return p / p.sum()


def dark_report(es: EigenSystem, threshold: float = 1e-6) -> DarkReport:
    """Ground-state transition strength of each excited state relative to the brightest monomer."""
    if not threshold > 0:
        raise PreconditionError("threshold must be positive")
    dsq = es.dipole_sq()[0, 1:]
    mu1, mu2 = es.site_dipoles.transition_dipoles
    scale = max(mu1 @ mu1, mu2 @ mu2)
    if scale == 0:
        rel = np.where(dsq == 0, 0.0, np.inf)
    else:
        rel = dsq / scale
    return DarkReport(dsq, rel, rel < threshold, threshold)
