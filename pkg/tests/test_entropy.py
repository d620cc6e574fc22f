import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropywalk.entropy import accept_tour, entropy_ratios, tour_entropy
from entropywalk.errors import ContractError
from entropywalk.graph import generate_barabasi_albert
from entropywalk.walker import Tour, WalkParams, tour_blocks


def tour(seq):
    return Tour.from_visits(seq, len(seq))


def shannon_oracle(seq):
    # direct sum of p * log(1/p), independent of the library's identity
    n = len(seq)
    h = 0.0
    for v in set(seq):
        p = seq.count(v) / n
        h += p * math.log(1 / p)
    return h, h / math.log(n)


class TestTourEntropy:
    def test_two_symbols(self):
        r = tour_entropy(tour([0, 1, 0, 1]))
        assert r.h == pytest.approx(math.log(2), abs=1e-15)
        assert r.h_max == pytest.approx(math.log(4), abs=1e-15)
        assert r.ratio == 0.5

    def test_hand_computed_three_symbols(self):
        # p = 1/4, 1/2, 1/4: H = 1.5 ln 2, ratio = 1.5 ln 2 / 2 ln 2
        r = tour_entropy(tour([0, 1, 2, 1]))
        assert r.h == pytest.approx(1.5 * math.log(2), abs=1e-12)
        assert r.ratio == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("lt", [2, 3, 7, 31, 100])
    def test_all_distinct_is_exactly_one(self, lt):
        assert tour_entropy(tour(list(range(lt)))).ratio == 1.0

    def test_incomplete_rejected(self):
        t = Tour.from_visits([0, 1, 0], lt=5)
        with pytest.raises(ContractError):
            tour_entropy(t)

    def test_single_visit_rejected(self):
        with pytest.raises(ContractError):
            tour_entropy(tour([0]))

    def test_base_invariance(self):
        t = tour([0, 1, 2, 1, 3, 1, 0, 4])
        assert tour_entropy(t, base=2).ratio == pytest.approx(tour_entropy(t).ratio, abs=1e-12)
        assert tour_entropy(t, base=2).h == pytest.approx(tour_entropy(t).h / math.log(2), abs=1e-12)


class TestAccept:
    def test_boundary_inclusive(self):
        assert accept_tour(tour([0, 1, 0, 1]), 0.5)

    def test_all_distinct_rejected_below_one(self):
        assert not accept_tour(tour([0, 1, 2, 3, 4]), 0.99)

    def test_et_one_accepts_everything(self):
        g = generate_barabasi_albert(200, 2, seed=1)
        p = WalkParams(nt=3000, lt=12, minm=2, maxm=5, et=1.0, master_seed=3)
        ratios = np.concatenate([b.ratios for b in tour_blocks(g, p)])
        assert (ratios <= 1.0).all()


walkish = st.lists(st.integers(0, 9), min_size=2, max_size=40).filter(
    lambda s: all(a != b for a, b in zip(s, s[1:]))
)


@settings(max_examples=200, deadline=None)
@given(walkish)
def test_matches_direct_shannon_sum(seq):
    h, ratio = shannon_oracle(seq)
    r = tour_entropy(tour(seq))
    assert r.h == pytest.approx(h, abs=1e-12)
    assert r.ratio == pytest.approx(ratio, abs=1e-12)
    assert 0 < r.h <= math.log(len(seq)) + 1e-15
    assert 0 < r.ratio <= 1
    assert (r.ratio == 1.0) == (len(set(seq)) == len(seq))


@settings(max_examples=100, deadline=None)
@given(walkish, st.randoms())
def test_permutation_invariant(seq, rnd):
    shuffled = list(seq)
    rnd.shuffle(shuffled)
    assert tour_entropy(tour(shuffled)).h == pytest.approx(tour_entropy(tour(seq)).h, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(walkish.filter(lambda s: len(s) == 12) | st.just(list(range(12))), min_size=1, max_size=30))
def test_vectorized_agrees_with_scalar(rows):
    rows = [r for r in rows if len(r) == 12]
    if not rows:
        return
    vec = entropy_ratios(np.array(rows))
    for row, ratio in zip(rows, vec):
        assert ratio == pytest.approx(tour_entropy(tour(row)).ratio, abs=1e-12)


def test_vectorized_exact_boundaries():
    rows = np.array([[0, 1, 0, 1], [0, 1, 2, 3], [4, 1, 5, 1]])
    assert list(entropy_ratios(rows)) == [0.5, 1.0, pytest.approx(0.75, abs=1e-12)]


def test_acceptance_monotone_in_threshold():
    g = generate_barabasi_albert(150, 3, seed=9)
    p = WalkParams(nt=2000, lt=15, minm=3, maxm=6, et=1.0, master_seed=1)
    ratios = np.concatenate([b.ratios for b in tour_blocks(g, p)])
    counts = [int((ratios <= et).sum()) for et in np.linspace(0.05, 1.0, 40)]
    assert counts == sorted(counts)
    assert counts[-1] == len(ratios)
