import unittest
import tempfile
import os
import sys

import numpy as np
import pywt

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from model.errors import ConfigError, DumpFormatError, InconsistentDimensionsError, PlaneTooSmallError
from model.wavelet_bank import (
    BIOR15_DEC_HI, BIOR15_DEC_LO, LEVELS, FeatureMap, WaveletBank, count_nonincreasing_transitions,
    decompose, level_shape, level_statistics, lifting_merge, lifting_split, read_feature_map,
    reconstruct, write_feature_map,
)
from bench.synthetic import pink_field


class TestFilterBank(unittest.TestCase):
    """Test cases for the one-dimensional lifting stages."""

    def test_filters_match_pywavelets(self):
        """The tabulated filters are the PyWavelets bior1.5 analysis pair."""
        wavelet = pywt.Wavelet('bior1.5')
        np.testing.assert_allclose(BIOR15_DEC_LO, wavelet.dec_lo, atol=1e-15)
        np.testing.assert_allclose(BIOR15_DEC_HI, wavelet.dec_hi, atol=1e-15)

    def test_interior_low_pass_matches_correlation(self):
        """Away from the borders the low band equals the decimated filter correlation."""
        x = np.random.default_rng(0).standard_normal(64)
        low, _ = lifting_split(x)
        reference = np.correlate(x, BIOR15_DEC_LO, mode='valid')[::2]
        np.testing.assert_allclose(low[2:len(low) - 2], reference, atol=1e-12)

    def test_high_pass_is_scaled_pair_difference(self):
        """high[n] = (x[2n] - x[2n+1]) / sqrt(2)."""
        x = np.random.default_rng(1).standard_normal(32)
        _, high = lifting_split(x)
        np.testing.assert_allclose(high, (x[0::2] - x[1::2]) / np.sqrt(2.0), atol=1e-12)

    def test_split_merge_even_and_odd(self):
        """Merging the split bands restores even and odd length signals."""
        rng = np.random.default_rng(2)
        for length in (16, 17, 3):
            x = rng.standard_normal(length)
            low, high = lifting_split(x)
            self.assertEqual(low.shape, ((length + 1) // 2,))
            np.testing.assert_allclose(lifting_merge(low, high, length), x, atol=1e-12)


class TestDecomposition(unittest.TestCase):
    """Test cases for the seven-level decomposition."""

    def setUp(self):
        """Set up a natural-like plane."""
        self.plane = 50.0 + 20.0 * pink_field((128, 128), np.random.default_rng(3))

    def test_twenty_two_maps_with_level_shapes(self):
        """One approximation plus seven levels of H, V, D with halving dimensions."""
        dec = decompose(self.plane)
        self.assertEqual(len(dec.maps), 22)
        self.assertEqual(dec.approximation.shape, (1, 1))
        for level in range(1, LEVELS + 1):
            for orientation in 'HVD':
                self.assertEqual(dec.detail(level, orientation).shape, level_shape((128, 128), level))
        self.assertEqual(dec.detail(7, 'H').shape, (64, 64))
        self.assertEqual(dec.coefficient_count(), 128 * 128)

    def test_constant_plane(self):
        """A constant plane has zero details and a DC gain of 128 in the approximation."""
        dec = decompose(np.full((128, 128), 10.0))
        for fmap in dec.details:
            self.assertLess(float(np.max(np.abs(fmap.coefficients))), 1e-9)
        self.assertAlmostEqual(float(dec.approximation.coefficients[0, 0]), 1280.0, places=9)

    def test_perfect_reconstruction(self):
        """decompose then reconstruct restores the plane within 1e-6."""
        rng = np.random.default_rng(4)
        planes = [
            self.plane,
            rng.uniform(0, 100, size=(128, 128)),
            rng.uniform(-50, 50, size=(150, 201)),
            np.tile(np.linspace(0, 100, 131), (133, 1)),
        ]
        for plane in planes:
            restored = reconstruct(decompose(plane))
            self.assertEqual(restored.shape, plane.shape)
            self.assertLess(float(np.max(np.abs(restored - plane))), 1e-6)

    def test_decomposition_is_linear(self):
        """decompose(2x - 3y) equals 2 decompose(x) - 3 decompose(y) map by map."""
        other = np.random.default_rng(5).uniform(-20, 20, size=(128, 128))
        combined = decompose(2.0 * self.plane - 3.0 * other)
        first, second = decompose(self.plane), decompose(other)
        for fmap, a, b in zip(combined.maps, first.maps, second.maps):
            np.testing.assert_allclose(fmap.coefficients, 2.0 * a.coefficients - 3.0 * b.coefficients, atol=1e-9)

    def test_approximation_only_keeps_the_mean(self):
        """With every detail zeroed the reconstruction is the plane's mean."""
        dec = decompose(self.plane)
        maps = [m if m.is_approximation else m.with_coefficients(np.zeros(m.shape)) for m in dec.maps]
        restored = reconstruct(dec.with_maps(maps))
        np.testing.assert_allclose(restored, np.full((128, 128), self.plane.mean()), atol=1e-9)

    def test_all_zero_maps_reconstruct_to_zero(self):
        """A decomposition of zeros reconstructs to a zero plane."""
        dec = decompose(self.plane)
        maps = [m.with_coefficients(np.zeros(m.shape)) for m in dec.maps]
        restored = reconstruct(dec.with_maps(maps))
        self.assertEqual(restored.shape, (128, 128))
        self.assertTrue(np.all(restored == 0.0))

    def test_periodization_reconstruction(self):
        """The PyWavelets periodization boundary also reconstructs exactly."""
        dec = decompose(self.plane, boundary='periodization')
        self.assertEqual(dec.detail(7, 'D').shape, (64, 64))
        restored = reconstruct(dec)
        self.assertLess(float(np.max(np.abs(restored - self.plane))), 1e-6)

    def test_vertical_edge_lands_in_vertical_maps(self):
        """A left/right step excites only the V (and D-free) detail maps."""
        plane = np.zeros((128, 128))
        plane[:, 61:] = 100.0
        dec = decompose(plane)
        energy = {o: sum(float(np.sum(dec.detail(s, o).coefficients ** 2)) for s in range(1, LEVELS + 1))
                  for o in 'HVD'}
        self.assertGreater(energy['V'], 1.0)
        self.assertLess(energy['H'], 1e-12)
        self.assertLess(energy['D'], 1e-12)

    def test_small_plane_rejected(self):
        """Planes below 128 in either dimension are rejected."""
        with self.assertRaises(PlaneTooSmallError):
            decompose(np.zeros((127, 256)))

    def test_unknown_boundary(self):
        """Only symmetric and periodization boundaries exist."""
        with self.assertRaises(ConfigError):
            WaveletBank('zero')

    def test_inconsistent_dimensions(self):
        """Reconstruction refuses a decomposition with a wrongly sized map."""
        dec = decompose(self.plane)
        maps = list(dec.maps)
        maps[5] = maps[5].with_coefficients(np.zeros((3, 3)))
        with self.assertRaises(InconsistentDimensionsError):
            reconstruct(dec.with_maps(maps))


class TestLevelStatistics(unittest.TestCase):
    """Test cases for per-level detail deviation."""

    def test_deviation_falls_towards_fine_levels(self):
        """Natural-like planes show non-increasing deviation in at least five of six transitions."""
        holds = 0
        for seed in range(10):
            plane = 50.0 + 15.0 * pink_field((256, 256), np.random.default_rng(100 + seed))
            stats = level_statistics(decompose(plane))
            if count_nonincreasing_transitions(stats) >= 5:
                holds += 1
        self.assertGreaterEqual(holds, 8)

    def test_count_transitions(self):
        """Transitions are counted coarse to fine."""
        self.assertEqual(count_nonincreasing_transitions({1: 5.0, 2: 4.0, 3: 4.0, 4: 6.0}), 2)


class TestFeatureMapDump(unittest.TestCase):
    """Test cases for the FMAP debug dump."""

    def setUp(self):
        """Set up a temporary directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'map.fmap')

    def tearDown(self):
        """Clean up the temporary directory."""
        self.tmp.cleanup()

    def test_header_and_values(self):
        """The dump keeps dimensions, level, orientation and channel."""
        fmap = FeatureMap('b', 6, 'D', np.arange(12, dtype=np.float64).reshape(3, 4) / 4.0)
        write_feature_map(fmap, self.path)
        with open(self.path, 'rb') as f:
            self.assertEqual(f.read(4), b'FMAP')
        loaded = read_feature_map(self.path)
        self.assertEqual((loaded.channel, loaded.level, loaded.orientation), ('b', 6, 'D'))
        np.testing.assert_array_equal(loaded.coefficients, fmap.coefficients)

    def test_truncated_dump(self):
        """A payload shorter than the header promises is rejected."""
        write_feature_map(FeatureMap('L', 7, 'H', np.ones((4, 4))), self.path)
        with open(self.path, 'rb') as f:
            data = f.read()
        with open(self.path, 'wb') as f:
            f.write(data[:-4])
        with self.assertRaises(DumpFormatError):
            read_feature_map(self.path)


if __name__ == '__main__':
    unittest.main()
