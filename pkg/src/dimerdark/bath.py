"""Thermal optical environment: cubic spectral density, Bose occupation,
golden-rule rate kernel and the spectral weights behind the psi_n kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericalError, PreconditionError
from .model import K_B_EV_PER_K

ANGULAR = 8 * math.pi / 3
QUAD_EPSREL = 1e-10
TAIL_CUTOFFS = 40.0


@dataclass(frozen=True)
class BathSpec:
    coupling: float
    cutoff: float = 10.0
    temperature: float = 300.0

    def __post_init__(self):
        if not self.cutoff > 0:
            raise PreconditionError("cutoff must be positive")
        if self.temperature < 0:
            raise PreconditionError("temperature must be non-negative")
        if self.coupling < 0:
            raise PreconditionError("coupling must be non-negative")

    @property
    def beta(self) -> float:
        """Inverse temperature in 1/eV (infinite at T = 0)."""
        if self.temperature == 0:
            return math.inf
        return 1.0 / (K_B_EV_PER_K * self.temperature)

    def with_coupling(self, coupling: float) -> "BathSpec":
        return BathSpec(coupling, self.cutoff, self.temperature)


def spectral_density(nu, spec: BathSpec):
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise PreconditionError("spectral density is defined for nu >= 0")
    out = spec.coupling * nu**3 / spec.cutoff**2 * np.exp(-nu / spec.cutoff)
    return float(out) if out.ndim == 0 else out


def _bose(x: np.ndarray, beta: float) -> np.ndarray:
    if math.isinf(beta):
        return np.zeros_like(x)
    with np.errstate(over="ignore", divide="ignore"):
        return 1.0 / np.expm1(beta * x)


def bose_occupation(omega, spec: BathSpec):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise PreconditionError("Bose occupation needs omega > 0")
    out = _bose(omega, spec.beta)
    return float(out) if out.ndim == 0 else out


def gamma(omega, spec: BathSpec):
    """Emission (omega > 0) or absorption (omega < 0) rate per unit |d|^2, in eV."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise PreconditionError("gamma is undefined at omega = 0 (degenerate transition)")
    return psi_n(omega, 0, spec)


def psi_n(nu, n: int, spec: BathSpec):
    """Spectral weight of the kernel psi_n on the signed frequency axis.

    For nu > 0 (emission side) the weight is (8 pi/3) J(nu)/nu^n (N(nu) + 1);
    for nu < 0 (absorption side) it is (8 pi/3) J(|nu|)/|nu|^n (-1)^n N(|nu|).
    psi_n(s) is the Fourier transform of this weight with e^{-i nu s}, so that
    convolutions of weights are transforms of products of kernels. At n = 0 the
    weight is exactly gamma(nu).
    """
    if n not in (0, 1, 2):
        raise PreconditionError("n must be 0, 1 or 2")
    nu = np.asarray(nu, dtype=float)
    x = np.abs(nu)
    beta = spec.beta
    pref = ANGULAR * spec.coupling / spec.cutoff**2
    damp = np.exp(-x / spec.cutoff)
    occ = _bose(x, beta)
    with np.errstate(invalid="ignore"):
        # x^(3-n) N(x) written to stay finite as x -> 0
        if math.isinf(beta):
            thermal = np.zeros_like(x)
        else:
            thermal = np.where(x > 0, x ** (3 - n) * occ, 1.0 / beta if n == 2 else 0.0)
    emission = x ** (3 - n) + thermal
    absorption = (-1) ** n * thermal
    out = pref * damp * np.where(nu > 0, emission, np.where(nu < 0, absorption, 0.0))
    if n == 2:
        out = np.where(nu == 0, pref * (0.0 if math.isinf(beta) else 1.0 / beta), out)
    return float(out) if out.ndim == 0 else out


def _segments(lo: float, hi: float, anchors, spec: BathSpec) -> list[float]:
    """Split [lo, hi] geometrically around each anchor so quad sees narrow features."""
    thermal = 1.0 / spec.beta if not math.isinf(spec.beta) else 0.0
    first = max(min(thermal, spec.cutoff) / 8, 1e-6)
    steps = []
    h = first
    while h < hi - lo:
        steps.append(h)
        h *= 4
    pts = {lo, hi}
    for p in anchors:
        pts.add(p)
        for h in steps:
            pts.update((p - h, p + h))
    return sorted(x for x in pts if lo <= x <= hi)


def integrate_weight(f, lo: float, hi: float, anchors, spec: BathSpec) -> float:
    pts = _segments(lo, hi, anchors, spec)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, err, *rest = integrate.quad(
            f, a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200, full_output=1
        )
        # a fourth element is quad's warning message; accept it only if the error is still small
        if len(rest) > 1 and err > 1e-8 * abs(val) + 1e-300:
            raise NumericalError(
                f"quadrature on [{a}, {b}] did not converge (achieved error {err:.3e}): {rest[1]}"
            )
        total += val
    return total


@lru_cache(maxsize=256)
def psi_n_at_zero(n: int, spec: BathSpec) -> float:
    """psi_n(s = 0): total spectral weight, e.g. (8 pi/3) int J/nu^2 (2N + 1) for n = 2."""
    span = TAIL_CUTOFFS * spec.cutoff
    return integrate_weight(lambda v: psi_n(v, n, spec), -span, span, (0.0,), spec)


def weight_convolution(n: int, m: int, omega: float, spec: BathSpec) -> float:
    """int dnu w_n(nu) w_m(omega - nu): the transform of psi_n(s) psi_m(s) at omega."""
    span = TAIL_CUTOFFS * spec.cutoff
    lo, hi = min(0.0, omega) - span, max(0.0, omega) + span

    def f(v):
        return psi_n(v, n, spec) * psi_n(omega - v, m, spec)

    return integrate_weight(f, lo, hi, (0.0, omega), spec)
