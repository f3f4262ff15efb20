"""Diagonalization of the truncated dimer Hamiltonian.

Three coupling structures have closed-form eigenbases:

* ``DirectA``  : only Q12 couples the excited states.
* ``IndirectB``: only Q01, Q02 couple ground and excited states, eps1 = eps2.
* ``MixedC``   : eps1 = eps2, Q01 = Q02 = Q_G, Q12 = Q_X.

Anything else goes through :func:`diag_numeric`. All paths return the same
:class:`EigenSystem` layout: energies ascending, eigenvectors as rows of
``unitary`` with a deterministic sign (largest-magnitude component positive,
lowest index on ties) and the eigenbasis dipole matrix ``dipoles[a, b]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError, NumericalError, PreconditionError
from .model import (
    DimerConfig,
    Monomer,
    SiteDipoleMatrix,
    SiteHamiltonian,
    assemble_site_hamiltonian,
    site_dipole_matrix,
)

STRUCTURE_TOL = 1e-12
_TIE_TOL = 1e-12

CASE_TAGS = ("DirectA", "IndirectB", "MixedC", "Numeric")


@dataclass(frozen=True)
class MixingAngles:
    chi: float
    d1_weight: float | None = None
    d2_weight: float | None = None


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    unitary: np.ndarray
    dipoles: np.ndarray
    case_tag: str
    site_dipoles: SiteDipoleMatrix
    mixing: MixingAngles | None = None

    def dipole_sq(self) -> np.ndarray:
        """|d_ab|^2 in Debye^2 as a 3x3 array."""
        return np.einsum("abx,abx->ab", self.dipoles, self.dipoles)

    def omega(self, a: int, b: int) -> float:
        return float(self.energies[a] - self.energies[b])


def _canonical_signs(u: np.ndarray) -> np.ndarray:
    signs = np.empty(u.shape[0])
    for a, row in enumerate(u):
        mag = np.abs(row)
        idx = int(np.flatnonzero(mag >= mag.max() - _TIE_TOL)[0])
        signs[a] = 1.0 if row[idx] >= 0 else -1.0
    return signs


def _finish(energies, u, site_d: SiteDipoleMatrix, tag, dipoles=None, mixing=None) -> EigenSystem:
    """Sort ascending, fix eigenvector signs and freeze the result.

    ``dipoles`` may carry closed-form eigenbasis dipoles in the same state
    order as ``u``; otherwise they are obtained by transforming the site matrix.
    """
    energies = np.asarray(energies, dtype=float)
    u = np.asarray(u, dtype=float)
    if dipoles is None:
        dipoles = np.einsum("as,bt,stx->abx", u, u, site_d.d)
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    u = u[order]
    dipoles = dipoles[np.ix_(order, order)]
    signs = _canonical_signs(u)
    u = u * signs[:, None]
    dipoles = dipoles * (signs[:, None] * signs[None, :])[:, :, None]
    for arr in (energies, u, dipoles):
        arr.flags.writeable = False
    return EigenSystem(energies, u, dipoles, tag, site_d, mixing)


def diag_numeric(h: SiteHamiltonian, d: SiteDipoleMatrix) -> EigenSystem:
    try:
        energies, vecs = np.linalg.eigh(h.h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if not np.all(np.isfinite(energies)):
        raise NumericalError("eigendecomposition produced non-finite energies")
    return _finish(energies, vecs.T, d, "Numeric")


def diag_numeric_batch(h: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized diagonalization of stacked Hamiltonians.

    ``h`` has shape (n, 3, 3) and ``d`` shape (n, 3, 3, 3) or (3, 3, 3).
    Returns ascending energies (n, 3) and eigenbasis dipoles (n, 3, 3, 3).
    Eigenvector signs are left as LAPACK returns them.
    """
    try:
        energies, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if d.ndim == 3:
        dipoles = np.einsum("nsa,ntb,stx->nabx", vecs, vecs, d)
    else:
        dipoles = np.einsum("nsa,ntb,nstx->nabx", vecs, vecs, d)
    return energies, dipoles


def _require(cond: bool, message: str):
    if not cond:
        raise PreconditionError(message)


def diag_case_a(cfg: DimerConfig) -> EigenSystem:
    """Direct exciton coupling.

    The lower excited state is c|1> + s|2>, the upper one c|2> - s|1>, with
    c = cos(chi/2), s = sin(chi/2), cos(chi) = (eps2 - eps1)/w12 and
    sin(chi) = -2 Q12/w12.
    """
    h = assemble_site_hamiltonian(cfg).h
    _require(
        abs(h[0, 1]) <= STRUCTURE_TOL and abs(h[0, 2]) <= STRUCTURE_TOL,
        "case A requires Q01 = Q02 = 0",
    )
    sd = site_dipole_matrix(cfg)
    d = sd.d
    eps1, eps2, q = h[1, 1], h[2, 2], h[1, 2]
    w12 = math.hypot(eps1 - eps2, 2 * q)
    if w12 <= STRUCTURE_TOL:
        raise DegenerateSpectrumError("case A excited states are degenerate", pair=(1, 2))
    cos_chi, sin_chi = (eps2 - eps1) / w12, -2 * q / w12
    chi = math.atan2(sin_chi, cos_chi)
    # half-angle forms keep c == |s| exactly for a homodimer, so symmetry-dark states are exactly dark
    c = math.sqrt(max(0.0, 0.5 * (1 + cos_chi)))
    s = math.sqrt(max(0.0, 0.5 * (1 - cos_chi)))
    if sin_chi < 0:
        s = -s
    energies = [0.0, 0.5 * (eps1 + eps2 - w12), 0.5 * (eps1 + eps2 + w12)]
    u = np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])

    mu1, mu2 = d[0, 1], d[0, 2]
    dip = np.zeros((3, 3, 3))
    dip[0, 0] = d[0, 0]
    dip[1, 1] = c * c * d[1, 1] + s * s * d[2, 2]
    dip[2, 2] = s * s * d[1, 1] + c * c * d[2, 2]
    dip[0, 1] = dip[1, 0] = c * mu1 + s * mu2
    dip[0, 2] = dip[2, 0] = c * mu2 - s * mu1
    # d22 - d11 in the site basis equals Delta2 - Delta1
    dip[1, 2] = dip[2, 1] = c * s * (d[2, 2] - d[1, 1])
    return _finish(energies, u, sd, "DirectA", dip, MixingAngles(chi))


def diag_case_b(cfg: DimerConfig) -> EigenSystem:
    """Indirect coupling through the shared ground state (eps1 = eps2 = eps, Q12 = 0).

    With D_j = Q0j / N and N = sqrt(Q01^2 + Q02^2), the excited combination
    b = D1|1> + D2|2> mixes with |0>; k = D2|1> - D1|2> keeps energy eps.
    """
    h = assemble_site_hamiltonian(cfg).h
    _require(abs(h[1, 2]) <= STRUCTURE_TOL, "case B requires Q12 = 0")
    _require(abs(h[1, 1] - h[2, 2]) <= STRUCTURE_TOL, "case B requires eps1 = eps2")
    sd = site_dipole_matrix(cfg)
    d = sd.d
    eps = h[1, 1]
    q01, q02 = h[0, 1], h[0, 2]
    n = math.hypot(q01, q02)
    if n <= STRUCTURE_TOL:
        raise DegenerateSpectrumError("case B needs a nonzero ground-state driving", pair=(1, 2))
    d1, d2 = q01 / n, q02 / n
    w02 = math.sqrt(4 * n * n + eps * eps)
    chi = math.atan2(2 * n / w02, eps / w02)
    c, s = math.cos(chi / 2), math.sin(chi / 2)
    energies = [0.5 * (eps - w02), eps, 0.5 * (eps + w02)]
    u = np.array([[c, -s * d1, -s * d2], [0.0, d2, -d1], [s, c * d1, c * d2]])

    mu1, mu2 = d[0, 1], d[0, 2]
    delta1, delta2 = d[1, 1] - d[0, 0], d[2, 2] - d[0, 0]
    mu_b = d1 * mu1 + d2 * mu2
    mu_k = d2 * mu1 - d1 * mu2
    p_bb = d1 * d1 * d[1, 1] + d2 * d2 * d[2, 2]
    p_kk = d2 * d2 * d[1, 1] + d1 * d1 * d[2, 2]
    p_bk = d1 * d2 * (delta1 - delta2)

    dip = np.zeros((3, 3, 3))
    dip[0, 0] = c * c * d[0, 0] - 2 * c * s * mu_b + s * s * p_bb
    dip[1, 1] = p_kk
    dip[2, 2] = s * s * d[0, 0] + 2 * c * s * mu_b + c * c * p_bb
    dip[0, 1] = dip[1, 0] = c * mu_k - s * p_bk
    dip[0, 2] = dip[2, 0] = math.cos(chi) * mu_b - 0.5 * math.sin(chi) * (
        d1 * d1 * delta1 + d2 * d2 * delta2
    )
    dip[1, 2] = dip[2, 1] = s * mu_k + c * p_bk
    return _finish(energies, u, sd, "IndirectB", dip, MixingAngles(chi, d1, d2))


def diag_case_c(cfg: DimerConfig) -> EigenSystem:
    """Symmetric homodimer with both direct (Q_X) and indirect (Q_G) coupling.

    The antisymmetric state (|1> - |2>)/sqrt2 decouples with energy eps - Q_X;
    the symmetric one mixes with |0> through sqrt2 Q_G.
    """
    h = assemble_site_hamiltonian(cfg).h
    _require(abs(h[1, 1] - h[2, 2]) <= STRUCTURE_TOL, "case C requires eps1 = eps2")
    _require(abs(h[0, 1] - h[0, 2]) <= STRUCTURE_TOL, "case C requires Q01 = Q02")
    sd = site_dipole_matrix(cfg)
    d = sd.d
    eps, qg, qx = h[1, 1], h[0, 1], h[1, 2]
    a = eps + qx
    w02 = math.sqrt(8 * qg * qg + a * a)
    if w02 <= STRUCTURE_TOL:
        raise DegenerateSpectrumError("case C ground and symmetric states are degenerate", pair=(0, 2))
    chi = math.atan2(2 * math.sqrt(2) * qg / w02, a / w02)
    c, s = math.cos(chi / 2), math.sin(chi / 2)
    r = 1 / math.sqrt(2)
    energies = [0.5 * (a - w02), eps - qx, 0.5 * (a + w02)]
    u = np.array([[c, -s * r, -s * r], [0.0, r, -r], [s, c * r, c * r]])

    mu1, mu2 = d[0, 1], d[0, 2]
    delta1, delta2 = d[1, 1] - d[0, 0], d[2, 2] - d[0, 0]
    mu_sym = r * (mu1 + mu2)
    mu_anti = r * (mu1 - mu2)
    p_sym = 0.5 * (d[1, 1] + d[2, 2])
    p_cross = 0.5 * (delta1 - delta2)

    dip = np.zeros((3, 3, 3))
    dip[0, 0] = c * c * d[0, 0] - 2 * c * s * mu_sym + s * s * p_sym
    dip[1, 1] = p_sym
    dip[2, 2] = s * s * d[0, 0] + 2 * c * s * mu_sym + c * c * p_sym
    dip[0, 1] = dip[1, 0] = c * mu_anti - s * p_cross
    dip[0, 2] = dip[2, 0] = math.cos(chi) * mu_sym - 0.25 * math.sin(chi) * (delta1 + delta2)
    dip[1, 2] = dip[2, 1] = s * mu_anti + c * p_cross
    return _finish(energies, u, sd, "MixedC", dip, MixingAngles(chi))


def classify_case(cfg: DimerConfig, tol: float = STRUCTURE_TOL) -> str:
    """Pick the closed-form structure a configuration satisfies, or ``"Numeric"``."""
    h = assemble_site_hamiltonian(cfg).h
    q01, q02, q12 = h[0, 1], h[0, 2], h[1, 2]
    same_eps = abs(h[1, 1] - h[2, 2]) <= tol
    if abs(q01) <= tol and abs(q02) <= tol:
        if abs(q12) <= tol and same_eps:
            return "Numeric"
        return "DirectA"
    if abs(q12) <= tol and same_eps:
        return "IndirectB"
    if same_eps and abs(q01 - q02) <= tol:
        return "MixedC"
    return "Numeric"


_DISPATCH = {"DirectA": diag_case_a, "IndirectB": diag_case_b, "MixedC": diag_case_c}


def diagonalize(cfg: DimerConfig, case: str = "auto") -> EigenSystem:
    aliases = {"a": "DirectA", "b": "IndirectB", "c": "MixedC", "numeric": "Numeric"}
    tag = classify_case(cfg) if case == "auto" else aliases.get(case.lower(), case)
    if tag == "Numeric":
        return diag_numeric(assemble_site_hamiltonian(cfg), site_dipole_matrix(cfg))
    if tag not in _DISPATCH:
        raise PreconditionError(f"unknown diagonalization case {case!r}")
    return _DISPATCH[tag](cfg)


def uniform_field_monomer_dipole(monomer: Monomer, field) -> np.ndarray:
    """Eigenbasis transition dipole of one monomer in a uniform field.

    ``field`` is in eV per Debye so that dipole . field is an energy. The
    expression is returned unnormalized; at zero field it equals 2 mu.
    """
    field = np.asarray(field, dtype=float)
    eps = monomer.excitation_energy
    mu = monomer.dipoles.mu
    delta = monomer.dipoles.delta
    shifted = eps + delta @ field
    drive = mu @ field
    denom = math.sqrt((shifted / 2) ** 2 + drive**2)
    if denom == 0.0:
        raise DegenerateSpectrumError("degenerate monomer: field cancels the excitation energy", pair=(0, 1))
    return (shifted * mu - drive * delta) / denom
