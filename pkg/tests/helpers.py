import numpy as np

from dimerdark.bath import BathSpec
from dimerdark.model import coupling_constant, make_dimer

DEFAULT_BATH = BathSpec(coupling_constant(1.0, 10.0))


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)


def _vec(rng, scale):
    return rng.normal(size=3) * scale


def random_case(rng, case: str):
    """A random configuration satisfying the structure of case 'a', 'b' or 'c'."""
    dip = dict(
        mu1=_vec(rng, 5),
        mu2=_vec(rng, 5),
        delta1=_vec(rng, 20),
        delta2=_vec(rng, 20),
        ground1=_vec(rng, 5),
        ground2=_vec(rng, 5),
    )
    if case == "a":
        return make_dimer(rng.uniform(1.5, 3.5), rng.uniform(1.5, 3.5), q12=rng.uniform(-0.3, 0.3), **dip)
    eps = rng.uniform(1.5, 3.5)
    if case == "b":
        return make_dimer(eps, eps, q01=rng.uniform(-0.3, 0.3), q02=rng.uniform(-0.3, 0.3), **dip)
    qg = rng.uniform(-0.3, 0.3)
    return make_dimer(eps, eps, q01=qg, q02=qg, q12=rng.uniform(-0.3, 0.3), **dip)
