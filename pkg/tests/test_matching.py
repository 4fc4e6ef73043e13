import itertools
import math

import numpy as np
import pytest

from fisheye_reid.core import Feature, Polarity, ScoreMatrix
from fisheye_reid.fusion import MatchProbabilityMatrix, Orientation, normalize
from fisheye_reid.matching import (
    Matching,
    greedy_match,
    hungarian_match,
    match_pair,
    match_pair_detailed,
)


def probs(values, orientation=Orientation.QUERY_ROWS):
    return MatchProbabilityMatrix(np.asarray(values, dtype=float), orientation)


def brute_force_best(values):
    """Exhaustive oracle: the injective pairing of size min(|Q|, |G|)
    maximizing the product of probabilities."""
    values = np.asarray(values)
    n_rows, n_cols = values.shape
    best_pairs, best_lp = (), float("-inf")
    if n_rows <= n_cols:
        rows = range(n_rows)
        for cols in itertools.permutations(range(n_cols), n_rows):
            lp = sum(
                math.log(values[r, c]) if values[r, c] > 0 else float("-inf")
                for r, c in zip(rows, cols)
            )
            if lp > best_lp:
                best_lp, best_pairs = lp, tuple(zip(rows, cols))
    else:
        cols = range(n_cols)
        for rows_sel in itertools.permutations(range(n_rows), n_cols):
            lp = sum(
                math.log(values[r, c]) if values[r, c] > 0 else float("-inf")
                for r, c in zip(rows_sel, cols)
            )
            if lp > best_lp:
                best_lp, best_pairs = lp, tuple(sorted(zip(rows_sel, cols)))
    return best_pairs, best_lp


class TestGreedy:
    def test_two_by_two_example(self):
        m = greedy_match(probs([[0.9, 0.1], [0.2, 0.8]]))
        assert m.pairs == ((0, 0), (1, 1))
        assert m.probability == pytest.approx(0.72, abs=1e-12)

    def test_single_entry(self):
        m = greedy_match(probs([[0.3]]))
        assert m.pairs == ((0, 0),)
        assert m.probability == pytest.approx(0.3)

    def test_greedy_is_not_optimal(self):
        # documents the known suboptimality of the greedy rule
        values = [[0.50, 0.49], [0.48, 0.01]]
        greedy = greedy_match(probs(values))
        assert greedy.pairs == ((0, 0), (1, 1))
        assert greedy.probability == pytest.approx(0.005, abs=1e-12)
        _, best_lp = brute_force_best(values)
        assert math.exp(best_lp) == pytest.approx(0.2352, abs=1e-12)
        assert greedy.log_probability < best_lp

    def test_tie_breaks_lowest_row_then_column(self):
        m = greedy_match(probs([[0.5, 0.5], [0.5, 0.5]]))
        assert m.pairs == ((0, 0), (1, 1))

    def test_empty_matrix(self):
        m = greedy_match(probs(np.zeros((0, 3))))
        assert m.pairs == ()
        assert m.log_probability == 0.0

    def test_stops_at_zero_entries(self):
        m = greedy_match(probs([[0.5, 0.0], [0.0, 0.0]]))
        assert m.pairs == ((0, 0),)
        assert math.isfinite(m.log_probability)

    def test_allow_zero_pairs_exhausts_smaller_side(self):
        m = greedy_match(probs([[0.5, 0.0], [0.0, 0.0]]), allow_zero_pairs=True)
        assert m.pairs == ((0, 0), (1, 1))
        assert m.log_probability == float("-inf")

    def test_scale_invariance(self, rng):
        for _ in range(30):
            values = rng.uniform(0.01, 1.0, size=(4, 5))
            base = greedy_match(probs(values))
            scaled = greedy_match(probs(values * 0.37))
            assert base.pairs == scaled.pairs

    def test_injective_and_exhausts_smaller_side(self, rng):
        for _ in range(30):
            rows, cols = rng.integers(1, 7, size=2)
            values = rng.uniform(0.01, 1.0, size=(rows, cols))
            m = greedy_match(probs(values))
            assert len(m.pairs) == min(rows, cols)
            assert len({q for q, _ in m.pairs}) == len(m.pairs)
            assert len({g for _, g in m.pairs}) == len(m.pairs)

    def test_matching_rejects_non_injective(self):
        with pytest.raises(ValueError):
            Matching(((0, 0), (0, 1)), 0.0)


class TestHungarian:
    def test_recovers_optimal_assignment(self):
        m = hungarian_match(probs([[0.50, 0.49], [0.48, 0.01]]))
        assert m.pairs == ((0, 1), (1, 0))
        assert m.probability == pytest.approx(0.2352, abs=1e-12)

    def test_diagonal_dominant_gives_identity(self):
        values = np.full((4, 4), 0.05) + np.diag(np.full(4, 0.8))
        m = hungarian_match(probs(values))
        assert m.pairs == tuple((i, i) for i in range(4))

    def test_matches_brute_force_on_random_instances(self, rng):
        for _ in range(100):
            rows, cols = rng.integers(1, 7, size=2)
            values = rng.uniform(0.001, 1.0, size=(rows, cols))
            m = hungarian_match(probs(values))
            _, best_lp = brute_force_best(values)
            assert m.log_probability == pytest.approx(best_lp, abs=1e-9)

    def test_never_below_greedy(self, rng):
        for _ in range(100):
            rows, cols = rng.integers(1, 7, size=2)
            values = rng.uniform(0.001, 1.0, size=(rows, cols))
            assert (
                hungarian_match(probs(values)).log_probability
                >= greedy_match(probs(values)).log_probability - 1e-12
            )

    def test_avoids_zero_entries_when_possible(self):
        m = hungarian_match(probs([[0.0, 0.4], [0.3, 0.0]]))
        assert m.pairs == ((0, 1), (1, 0))
        assert math.isfinite(m.log_probability)

    def test_empty_matrix(self):
        assert hungarian_match(probs(np.zeros((2, 0)))).pairs == ()


def sim_scores(values):
    return ScoreMatrix(np.asarray(values, dtype=float), Polarity.SIMILARITY, Feature.DL)


class TestMatchPair:
    def test_one_by_one(self):
        m = match_pair([sim_scores([[2.0]])], temperature=10.0)
        assert m.pairs == ((0, 0),)
        assert m.log_probability == 0.0  # single candidate, probability 1

    def test_rectangular_exhausts_smaller_side(self):
        values = [[0.9, 0.1], [0.4, 0.6], [0.2, 0.3]]
        m = match_pair([sim_scores(values)], temperature=10.0)
        assert len(m.pairs) == 2
        queries = {q for q, _ in m.pairs}
        assert len(queries) == 2

    def test_orientation_disagreement_returns_higher_probability(self, rng):
        found = 0
        for _ in range(300):
            values = rng.uniform(0.0, 1.0, size=(3, 3))
            result = match_pair_detailed([sim_scores(values)], temperature=0.5)
            m_q, m_g = result.query_rows_matching, result.gallery_rows_matching
            pairs_g_flipped = tuple(sorted((q, g) for g, q in m_g.pairs))
            if pairs_g_flipped != m_q.pairs:
                found += 1
                expected_lp = max(m_q.log_probability, m_g.log_probability)
                assert result.matching.log_probability == expected_lp
                if m_g.log_probability > m_q.log_probability:
                    assert result.matching.orientation is Orientation.GALLERY_ROWS
                    assert result.matching.pairs == pairs_g_flipped
                else:
                    assert result.matching.pairs == m_q.pairs
        assert found > 0, "no orientation disagreement found in 300 random matrices"

    def test_tie_prefers_query_rows(self):
        # symmetric 1x1: both orientations give log prob 0
        result = match_pair_detailed([sim_scores([[1.0]])])
        assert result.matching.orientation is Orientation.QUERY_ROWS

    def test_symmetric_dominant_square_agrees_both_ways(self):
        values = np.array([[0.9, 0.1, 0.1], [0.1, 0.8, 0.2], [0.1, 0.2, 0.7]])
        result = match_pair_detailed([sim_scores(values)], temperature=1.0)
        flipped = tuple(sorted((q, g) for g, q in result.gallery_rows_matching.pairs))
        assert result.query_rows_matching.pairs == flipped

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            match_pair([sim_scores([[1.0]]), sim_scores([[1.0, 2.0]])])

    def test_gallery_rows_pairs_are_reexpressed(self, rng):
        # force a gallery-rows win and check pairs are (query, gallery)
        for _ in range(200):
            values = rng.uniform(0.0, 1.0, size=(2, 3))
            result = match_pair_detailed([sim_scores(values)], temperature=0.3)
            if result.matching.orientation is Orientation.GALLERY_ROWS:
                for q, g in result.matching.pairs:
                    assert 0 <= q < 2 and 0 <= g < 3
                return
        pytest.skip("gallery orientation never won; acceptable but unexpected")
