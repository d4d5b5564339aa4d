"""Random small CRF problems and their exhaustive MAP oracle."""
import itertools

import numpy as np

from crisp.crf import APPEARANCE, SMOOTHNESS, DenseCrfProblem, KernelSpec, energy

LABELINGS_3X3 = np.array(list(itertools.product((0, 1), repeat=9))).reshape(-1, 3, 3)

# annealed settings used for MAP agreement
MF_MAP = dict(iterations=20, temperature=np.geomspace(1.0, 0.02, 20), exact=True, track_best=True)
FW_MAP = dict(iterations=30, regularizer=np.geomspace(1.0, 0.02, 30), step=0.5, exact=True,
              track_best=True)


def oracle_problem(seed, shape=(3, 3)):
    """Two-class problem whose coupling w0 * sum(w_m) stays below the largest unary gap."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.02, 0.98, shape)
    unary = np.stack([-np.log1p(-p), -np.log(p)], axis=2)
    gap = np.abs(unary[..., 0] - unary[..., 1]).max()
    feats = rng.normal(0.0, 1.0, shape + (1,))
    wa, ws = rng.uniform(0.2, 1.0, 2)
    w0 = gap / (wa + ws) * rng.uniform(0.0, 1.0)
    kernels = (KernelSpec(APPEARANCE, 2.0, (wa,), 1.0), KernelSpec(SMOOTHNESS, 1.0, (ws,)))
    return DenseCrfProblem(unary, kernels, feats, w0)


def exhaustive_map(problem, labelings=LABELINGS_3X3):
    energies = np.array([energy(problem, lab) for lab in labelings])
    i = int(np.argmin(energies))
    return labelings[i], float(energies[i])
