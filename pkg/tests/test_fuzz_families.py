"""Seeded fuzz verification across the family parameter spaces.

Every randomly drawn valid instance must close the structure equations
exactly and pass the pointwise condition checker with the solved scalar
multiplier equal to one.  This complements the hand-picked slices with
breadth: random scalars, random sign branches, random concrete or opaque
function slots.
"""

import random

import pytest

from psskit.families import build_family, lemma21_check, verify_pss
from randfam import random_family_params

FUZZ_SEED = 20240816
N_PER_KIND = 20


@pytest.mark.parametrize("kind", ("T22", "T23", "T24", "T25i", "T25ii"))
def test_random_instances_verify(kind):
    rng = random.Random(FUZZ_SEED + hash(kind) % 1000)
    for i in range(N_PER_KIND):
        params = random_family_params(kind, rng)
        inst = build_family(params)
        rep = verify_pss(inst)
        assert rep.ok, (i, params)
        lem = lemma21_check(inst)
        assert lem.all_passed, (i, params,
                                [c for c in lem.conditions if not c.passed])
        assert lem.delta_solved == 1, (i, params)
