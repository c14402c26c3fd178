import unittest

import numpy as np
from scipy import stats

from tfbm import covariance
from tfbm.covariance import Meaning, ProcessSpec
from tfbm.errors import NumericalDegeneracyError, ParameterError
from tfbm.nulldist import NullSpectrum, acceptance_region, qf_eigenvalues, sample_null
from tfbm.simulate import simulate_process
from tfbm.statistics import StatisticKind, StatisticSpec, detrended_covariance, evaluate, statistic_matrix
from tfbm.unittest import ArrayTestCase


def random_psd(rng, n):
    g = rng.standard_normal((n, n))
    return g @ g.T


class QfEigenvaluesTestCase(ArrayTestCase):
    def testIdentityCovariance(self):
        spectrum = qf_eigenvalues(np.eye(4), np.diag([0.5, -1.0, 3.0, 2.0]))
        self.assertArrayClose(spectrum.eigenvalues, [3.0, 2.0, 0.5, -1.0])

    def testScalarScaling(self):
        spectrum = qf_eigenvalues(4 * np.eye(3), np.eye(3) / 3)
        self.assertArrayClose(spectrum.eigenvalues, np.full(3, 4 / 3))

    def testSimilarityWithProduct(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            sigma = random_psd(rng, 8)
            a = rng.standard_normal((8, 8))
            a = a + a.T
            spectrum = qf_eigenvalues(sigma, a)
            product = np.sort(np.linalg.eigvals(sigma @ a).real)[::-1]
            self.assertArrayClose(spectrum.eigenvalues, product, atol=1e-9, rtol=1e-9)
            scale = np.abs(spectrum.eigenvalues).sum()
            self.assertAlmostEqual(spectrum.mean, np.trace(sigma @ a), delta=1e-9 * scale)

    def testNegativeEigenvaluesKept(self):
        spec = ProcessSpec('tfbm1', 0.3, 0.3)
        sigma = covariance.covariance_matrix(spec, 40, Meaning.INCREMENT_NOISE)
        spectrum = qf_eigenvalues(sigma, statistic_matrix(StatisticSpec('acvf', 1), 40))
        self.assertLess(spectrum.eigenvalues[-1], 0)
        self.assertGreater(spectrum.eigenvalues[0], 0)

    def testDmaSpectrumNonNegative(self):
        sigma = covariance.covariance_matrix(ProcessSpec('tfbm2', 0.7, 0.3), 50, Meaning.PROCESS_LEVELS)
        tilde = detrended_covariance(sigma, 2)
        spectrum = qf_eigenvalues(tilde, statistic_matrix(StatisticSpec('dma', 2), 50))
        self.assertGreaterEqual(spectrum.eigenvalues[-1], -1e-10 * spectrum.eigenvalues[0])

    def testRejectsIndefiniteCovariance(self):
        with self.assertRaises(NumericalDegeneracyError):
            qf_eigenvalues(np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2))

    def testShapeMismatch(self):
        with self.assertRaises(ParameterError):
            qf_eigenvalues(np.eye(3), np.eye(2))


class SampleNullTestCase(ArrayTestCase):
    def testChiSquareMoments(self):
        draws = 100_000
        x = sample_null(NullSpectrum(np.array([1.0])), draws, seed=1)
        self.assertEqual(x.shape, (draws,))
        self.assertWithinSE(x.mean(), 1.0, np.sqrt(2 / draws), k=4)
        # Var of the sample variance of chi2(1): (mu4 - sigma^4) / L = (60 - 4) / L
        self.assertWithinSE(x.var(), 2.0, np.sqrt(56 / draws), k=4)

    def testWeightedMoments(self):
        weights = np.array([2.0, 0.5, -0.3, 0.1])
        spectrum = NullSpectrum(weights)
        draws = 100_000
        x = sample_null(spectrum, draws, seed=2)
        self.assertWithinSE(x.mean(), spectrum.mean, np.sqrt(spectrum.variance / draws), k=4)
        self.assertAlmostEqual(x.var() / spectrum.variance, 1.0, delta=0.05)

    def testZeroSpectrum(self):
        x = sample_null(NullSpectrum(np.zeros(5)), 1_234, seed=3)
        self.assertTrue(np.all(x == 0))

    def testDeterministic(self):
        spectrum = NullSpectrum(np.array([1.0, 0.2]))
        self.assertTrue(np.array_equal(sample_null(spectrum, 2_500, 5), sample_null(spectrum, 2_500, 5)))
        self.assertFalse(np.array_equal(sample_null(spectrum, 2_500, 5), sample_null(spectrum, 2_500, 6)))
        # a shorter run is a prefix of a longer one
        self.assertTrue(np.array_equal(sample_null(spectrum, 1_500, 5), sample_null(spectrum, 2_500, 5)[:1_500]))

    def testScalingCommonRandomNumbers(self):
        spectrum = NullSpectrum(np.array([1.5, 0.4, 0.1]))
        base = sample_null(spectrum, 5_000, seed=7)
        scaled = sample_null(NullSpectrum(3 * spectrum.eigenvalues), 5_000, seed=7)
        self.assertArrayClose(np.quantile(scaled, [0.025, 0.5, 0.975]), 3 * np.quantile(base, [0.025, 0.5, 0.975]))

    def testBadCount(self):
        with self.assertRaises(ParameterError):
            sample_null(NullSpectrum(np.ones(2)), 0, seed=1)


class AcceptanceRegionTestCase(ArrayTestCase):
    def testUniformGrid(self):
        region = acceptance_region(np.arange(1, 101), 0.05)
        self.assertAlmostEqual(region.lower, 3.475, places=12)
        self.assertAlmostEqual(region.upper, 97.525, places=12)
        self.assertEqual(region.sample_count, 100)
        self.assertTrue(region.contains(50))
        self.assertFalse(region.contains(99))

    def testNarrowRegion(self):
        region = acceptance_region(np.arange(1, 102), 0.999)
        self.assertLessEqual(region.lower, region.upper)
        self.assertLess(region.upper - region.lower, 0.2)
        self.assertTrue(region.contains(51))

    def testDegenerate(self):
        region = acceptance_region(np.full(40, 2.5), 0.05)
        self.assertEqual((region.lower, region.upper), (2.5, 2.5))

    def testValidation(self):
        for c in (0.0, 1.0, -0.1):
            with self.assertRaises(ParameterError):
                acceptance_region(np.arange(10), c)
        with self.assertRaises(ParameterError):
            acceptance_region([], 0.05)


class NullLawTestCase(ArrayTestCase):
    def testDirectStatisticsMatchWeightedChiSquare(self):
        n, draws = 200, 40_000
        specs = [
            ProcessSpec('tfbm1', 0.3, 0.3),
            ProcessSpec('tfbm2', 0.3, 0.3),
            ProcessSpec('tfbm3', 0.7, 0.3),
            ProcessSpec('fbm', 0.3),
        ]
        for spec in specs:
            batch = simulate_process(spec, n, draws, seed=12)
            for kind in StatisticKind:
                stat = StatisticSpec(kind)
                if kind is StatisticKind.ACVF:
                    sigma = covariance.covariance_matrix(spec, n, Meaning.INCREMENT_NOISE)
                    observed = batch.increments()
                else:
                    sigma = covariance.covariance_matrix(spec, n, Meaning.PROCESS_LEVELS)
                    observed = batch.values
                    if kind is StatisticKind.DMA:
                        sigma = detrended_covariance(sigma, stat.tau)
                spectrum = qf_eigenvalues(sigma, statistic_matrix(stat, n))
                null = sample_null(spectrum, draws, seed=11)
                distance = stats.ks_2samp(evaluate(stat, observed), null).statistic
                self.assertLess(distance, 0.02, (spec.describe(), str(stat)))


if __name__ == '__main__':
    unittest.main()
