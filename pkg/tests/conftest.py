"""Shared corpus builders for the test suite.

Ground truth everywhere is a constructed root multiset: polynomials are
expanded from known roots, never the other way around, so every expected
value can be checked against the roots directly.
"""

import numpy as np
import pytest

from polyroot.oracles import Corpus, build_from_roots, random_roots, separated_roots

CORPUS_SEED = 0xC0FFEE


@pytest.fixture(scope="session")
def small_corpus():
    """Degrees 2..16, roots in [-2, 2]^2 with pairwise separation >= 0.1."""
    rng = np.random.default_rng(CORPUS_SEED)
    corpus = Corpus(seed=CORPUS_SEED)
    for d in range(2, 17, 2):
        for _ in range(3):
            roots = separated_roots(rng, d, box=2.0, min_sep=0.1)
            corpus.add(build_from_roots(roots), roots)
    return corpus


@pytest.fixture(scope="session")
def annulus_gap_corpus():
    """Polynomials whose roots avoid the annulus A(0, 1/2, 2): every root has
    modulus < 1/2 or > 2, so the unit disc is 2-isolated by construction."""
    rng = np.random.default_rng(CORPUS_SEED + 1)
    corpus = Corpus(seed=CORPUS_SEED + 1)
    for _ in range(24):
        d = int(rng.integers(2, 13))
        roots = random_roots(rng, d, inner=(0.05, 0.45), outer=(2.1, 8.0))
        corpus.add(build_from_roots(roots), roots)
    return corpus
