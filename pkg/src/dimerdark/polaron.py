"""Permanent-dipole corrections to the optical rates via the polaron frame.

The dimer's own permanent dipoles d_aa displace the optical modes. After a
Schrieffer-Wolff rotation that removes the induced self-dipole driving to
second order, the transition dipoles and level spacings are dressed and the
golden-rule rates acquire fourth-order corrections. All time integrals are
done in the frequency domain as convolutions of the psi_n spectral weights.

Rate functions here take ``(a, b)`` and return the transfer a -> b evaluated
at omega_ab = E_a - E_b, so that omega_ab > 0 is emission.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, gamma, psi_n_at_zero, weight_convolution
from .eigen import EigenSystem
from .errors import DegenerateSpectrumError, PreconditionError

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class PolaronFrame:
    lam: float
    shifted_energies: np.ndarray
    dressed_dipoles: np.ndarray
    delta_dipoles: np.ndarray

    def shifted_omega(self, a: int, b: int) -> float:
        return float(self.shifted_energies[a] - self.shifted_energies[b])


def build_polaron_frame(es: EigenSystem, spec: BathSpec, lam: float) -> PolaronFrame:
    d = es.dipoles
    e = es.energies
    n = len(e)
    diag = np.array([d[a, a] for a in range(n)])
    dressed = d.copy()
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            gap = e[a] - e[b]
            if abs(gap) < DEGENERACY_TOL:
                raise DegenerateSpectrumError(
                    f"Schrieffer-Wolff generator diverges: states {a} and {b} are degenerate",
                    pair=(min(a, b), max(a, b)),
                )
            drive = lam * (d[a, b] @ (diag[a] + diag[b]))
            dressed[a, b] = d[a, b] + drive / gap * (diag[a] - diag[b])
    shifted = e - lam * np.einsum("ax,ax->a", diag, diag)
    delta = diag[:, None, :] - diag[None, :, :]
    for arr in (shifted, dressed, delta):
        arr.flags.writeable = False
    return PolaronFrame(float(lam), shifted, dressed, delta)


def kernel_K(omega: float, spec: BathSpec) -> float:
    """psi_2(0) gamma(omega) minus the transform of psi_2(s) psi_0(s).

    This is the weight lost from the zero-phonon-like golden-rule line when the
    displacement factor exp(|Delta|^2 (psi_2(s) - psi_2(0))) is expanded to first
    order; it is non-negative for the cubic spectral density.
    """
    if omega == 0:
        raise PreconditionError("K is undefined at omega = 0")
    return psi_n_at_zero(2, spec) * gamma(omega, spec) - weight_convolution(2, 0, omega, spec)


def _check_pair(es: EigenSystem, a: int, b: int) -> float:
    if a == b:
        raise PreconditionError("rates need two distinct states")
    w = es.omega(a, b)
    if abs(w) < DEGENERACY_TOL:
        raise DegenerateSpectrumError(f"states {a} and {b} are degenerate", pair=(min(a, b), max(a, b)))
    return w


def uncorrected_rate(es: EigenSystem, spec: BathSpec, a: int, b: int) -> float:
    w = _check_pair(es, a, b)
    d = es.dipoles[a, b]
    return float(d @ d) * gamma(w, spec)


def rate_correction(
    frame: PolaronFrame,
    es: EigenSystem,
    spec: BathSpec,
    a: int,
    b: int,
    *,
    second_term_at_shifted: bool = False,
) -> float:
    """Fourth-order change of the a -> b rate caused by the dimer permanent dipoles."""
    w = _check_pair(es, a, b)
    d = es.dipoles
    dab = d[a, b]
    dsq = float(dab @ dab)
    if dsq == 0.0:
        return 0.0
    delta = frame.delta_dipoles[a, b]
    first = -(dsq * float(delta @ delta) + float(dab @ delta) ** 2) * kernel_K(w, spec)
    w2 = frame.shifted_omega(a, b) if second_term_at_shifted else w
    asym = float(dab @ d[a, a]) ** 2 - float(dab @ d[b, b]) ** 2
    second = -asym / w * 2 * frame.lam * gamma(w2, spec)
    return first + second


def corrected_rate(
    frame: PolaronFrame,
    es: EigenSystem,
    spec: BathSpec,
    a: int,
    b: int,
    *,
    second_term_at_shifted: bool = False,
) -> float:
    """Uncorrected rate at the shifted spacing plus the fourth-order correction."""
    _check_pair(es, a, b)
    d = es.dipoles[a, b]
    dsq = float(d @ d)
    if dsq == 0.0:
        return 0.0
    base = dsq * gamma(frame.shifted_omega(a, b), spec)
    return base + rate_correction(
        frame, es, spec, a, b, second_term_at_shifted=second_term_at_shifted
    )


def full_polaron_rate(frame: PolaronFrame, es: EigenSystem, spec: BathSpec, a: int, b: int) -> float:
    """Polaron-frame golden-rule rate with the displacement exponential kept to first order.

    In the frequency domain this reads
    |d|^2 gamma(w) - |d|^2 |D|^2 K(w) + |d.D|^2 (w1 * w1)(w)
    with dressed dipoles d, D = d_aa - d_bb and the shifted spacing w.
    """
    _check_pair(es, a, b)
    d = frame.dressed_dipoles[a, b]
    dsq = float(d @ d)
    if dsq == 0.0:
        return 0.0
    w = frame.shifted_omega(a, b)
    delta = frame.delta_dipoles[a, b]
    out = dsq * gamma(w, spec) - dsq * float(delta @ delta) * kernel_K(w, spec)
    proj = float(d @ delta) ** 2
    if proj:
        out += proj * weight_convolution(1, 1, w, spec)
    return out
