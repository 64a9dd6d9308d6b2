import unittest
import os
import sys
from itertools import combinations

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from bench.correlation import kendall, pearson, rmse, spearman
from model.errors import DegenerateInputError


def mid_ranks(values):
    values = np.asarray(values, dtype=np.float64)
    ranks = np.empty(values.size)
    for i, v in enumerate(values):
        below = np.sum(values < v)
        equal = np.sum(values == v)
        ranks[i] = below + (equal + 1) / 2.0
    return ranks


def brute_spearman(x, y):
    rx, ry = mid_ranks(x), mid_ranks(y)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    return float(np.sum(dx * dy) / np.sqrt(np.sum(dx ** 2) * np.sum(dy ** 2)))


def brute_kendall(x, y):
    concordant = discordant = ties_x = ties_y = 0
    for i, j in combinations(range(len(x)), 2):
        sx, sy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
        if sx == 0 and sy == 0:
            continue
        if sx == 0:
            ties_x += 1
        elif sy == 0:
            ties_y += 1
        elif sx == sy:
            concordant += 1
        else:
            discordant += 1
    return (concordant - discordant) / np.sqrt(
        (concordant + discordant + ties_x) * (concordant + discordant + ties_y))


class TestRankCorrelation(unittest.TestCase):
    """Test cases for Spearman and Kendall correlation."""

    def test_perfect_and_reversed(self):
        """Identical orderings give 1 and reversed orderings give -1."""
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        self.assertAlmostEqual(spearman(x, [10, 20, 30, 40, 50]), 1.0)
        self.assertAlmostEqual(spearman(x, [5, 4, 3, 2, 1]), -1.0)
        self.assertAlmostEqual(kendall(x, [5, 4, 3, 2, 1]), -1.0)

    def test_spearman_with_ties(self):
        """Tied values take their mid-rank."""
        self.assertAlmostEqual(spearman([1, 2, 2, 3], [1, 3, 2, 4]), np.sqrt(0.9), places=7)
        self.assertAlmostEqual(spearman([1, 2, 2, 3], [1, 3, 2, 4]), 0.9486833, places=7)

    def test_kendall_single_swap(self):
        """One discordant pair out of six gives 2/3."""
        self.assertAlmostEqual(kendall([1, 2, 3, 4], [1, 2, 4, 3]), 0.666667, places=6)

    def test_invariant_under_monotone_transform(self):
        """Rank correlations ignore strictly increasing transforms of either input."""
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 5, 30)
        y = x + rng.normal(0, 1, 30)
        self.assertAlmostEqual(spearman(np.exp(x), y), spearman(x, y), places=12)
        self.assertAlmostEqual(kendall(x, y ** 3), kendall(x, y), places=12)

    def test_matches_brute_force_with_ties(self):
        """Random sequences with many ties agree with a direct computation."""
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(5, 15))
            x = rng.integers(0, 5, n).astype(float)
            y = rng.integers(0, 5, n).astype(float)
            if np.all(x == x[0]) or np.all(y == y[0]):
                continue
            self.assertAlmostEqual(spearman(x, y), brute_spearman(x, y), delta=1e-12)
            self.assertAlmostEqual(kendall(x, y), brute_kendall(x, y), delta=1e-12)


class TestLinearAgreement(unittest.TestCase):
    """Test cases for Pearson correlation and RMSE."""

    def test_pearson_example(self):
        """Five-point example: r = 6 / sqrt(60)."""
        self.assertAlmostEqual(pearson([1, 2, 3, 4, 5], [2, 4, 5, 4, 5]), 0.774597, places=6)

    def test_rmse(self):
        """RMSE is zero on identical sequences and allows constant input."""
        self.assertEqual(rmse([1, 2, 3], [1, 2, 3]), 0.0)
        self.assertAlmostEqual(rmse([0, 0], [3, 4]), np.sqrt(12.5))


class TestDegenerateInput(unittest.TestCase):
    """Test cases for inputs with no defined correlation."""

    def test_constant_sequence(self):
        """A constant sequence has no rank correlation."""
        for func in (spearman, kendall, pearson):
            with self.assertRaises(DegenerateInputError):
                func([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        """Sequences must have the same length."""
        with self.assertRaises(DegenerateInputError):
            spearman([1, 2, 3], [1, 2])
        with self.assertRaises(DegenerateInputError):
            rmse([1, 2, 3], [1, 2])

    def test_too_short_and_non_finite(self):
        """One point or a NaN is rejected."""
        with self.assertRaises(DegenerateInputError):
            kendall([1], [1])
        with self.assertRaises(DegenerateInputError):
            pearson([1, np.nan, 3], [1, 2, 3])


if __name__ == '__main__':
    unittest.main()
