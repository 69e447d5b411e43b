import numpy as np
import pytest
from hypothesis import settings

from isac_region.fixtures import build_spec

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def random_stochastic(rng, shape, n_given, sparsity=0.0):
    """Random kernel with rows over the trailing axes summing to one."""
    table = rng.random(shape)
    if sparsity:
        table = np.where(rng.random(shape) < sparsity, 0.0, table)
    flat = table.reshape(int(np.prod(shape[:n_given])), -1)
    flat[flat.sum(axis=1) == 0, 0] = 1.0
    flat /= flat.sum(axis=1, keepdims=True)
    return flat.reshape(shape)


def random_spec(rng, sizes, sparsity=0.0):
    """Arbitrary (generally non-degraded) spec with the given alphabet sizes."""
    nA, nX = sizes.get("A", 1), sizes.get("X", 1)
    nS1, nS2 = sizes.get("S1", 1), sizes.get("S2", 1)
    nY1, nY2 = sizes.get("Y1", 1), sizes.get("Y2", 1)
    sk = random_stochastic(rng, (nA, nS1 * nS2), 1, sparsity).reshape(nA, nS1, nS2)
    mk = random_stochastic(rng, (nS1, nS2, nX, nY1 * nY2), 3, sparsity).reshape(nS1, nS2, nX, nY1, nY2)
    return build_spec(sizes, lambda a, s1, s2: sk[a, s1, s2], lambda s1, s2, x, y1, y2: mk[s1, s2, x, y1, y2])


def random_degraded_spec(rng, sizes):
    """Physically degraded spec: (Y2, S2) drawn from a kernel of (S1, Y1)."""
    nA, nX = sizes.get("A", 1), sizes.get("X", 1)
    nS1, nS2 = sizes.get("S1", 1), sizes.get("S2", 1)
    nY1, nY2 = sizes.get("Y1", 1), sizes.get("Y2", 1)
    p_s1 = random_stochastic(rng, (nA, nS1), 1)
    p_y1 = random_stochastic(rng, (nS1, nX, nY1), 2)
    # S2 depends on S1 only and Y2 on (S1, Y1, S2), so (Y2, S2) is a channel of (S1, Y1).
    r = random_stochastic(rng, (nS1, nS2), 1)
    q2 = random_stochastic(rng, (nS1, nY1, nS2, nY2), 3)
    return build_spec(
        sizes,
        lambda a, s1, s2: p_s1[a, s1] * r[s1, s2],
        lambda s1, s2, x, y1, y2: p_y1[s1, x, y1] * q2[s1, y1, s2, y2],
    )


def random_aux(rng, spec, v_size=None, sparsity=0.0):
    from isac_region import AuxDist

    v_size = v_size or spec.cardinality_bound
    mass = rng.random((v_size, spec.A.size, spec.X.size))
    if sparsity:
        mass = np.where(rng.random(mass.shape) < sparsity, 0.0, mass)
    if mass.sum() == 0:
        mass[0, 0, 0] = 1.0
    return AuxDist.from_mass(spec, mass / mass.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
