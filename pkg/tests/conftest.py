from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from compdyn.mobius import DiskAutomorphismParams, MobiusMap, from_disk_params

CORPUS_SEED = 20240601
CORPUS_SIZE = 1000


def random_params(rng: np.random.Generator, max_modulus: float = 0.95) -> DiskAutomorphismParams:
    """``a`` uniform (by area) in ``|a| <= max_modulus``, ``b`` uniform on the circle."""
    r = max_modulus * math.sqrt(rng.random())
    a = r * cmath.exp(2j * math.pi * rng.random())
    b = cmath.exp(2j * math.pi * rng.random())
    return DiskAutomorphismParams(a, b)


def automorphism_corpus(n: int = CORPUS_SIZE, seed: int = CORPUS_SEED) -> list[MobiusMap]:
    rng = np.random.default_rng(seed)
    return [from_disk_params(random_params(rng)) for _ in range(n)]


def hyperbolic_example() -> MobiusMap:
    return from_disk_params(DiskAutomorphismParams(-0.5, 1))


def parabolic_example() -> MobiusMap:
    return MobiusMap(1 - 1j, 1, -1, -1 - 1j)


def rotation(angle_turns: float = 0.25) -> MobiusMap:
    return from_disk_params(DiskAutomorphismParams(0, cmath.exp(2j * math.pi * angle_turns)))


def elliptic_at(z0: complex, angle_turns: float = 0.125) -> MobiusMap:
    """Rotation conjugated by the involution swapping 0 and ``z0``."""
    from compdyn.mobius import compose

    s = MobiusMap(-1, z0, -complex(z0).conjugate(), 1)
    return compose(s, compose(rotation(angle_turns), s))


@pytest.fixture(scope="session")
def corpus():
    return automorphism_corpus()
