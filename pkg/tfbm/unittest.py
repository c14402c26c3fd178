import unittest

import numpy as np


class ArrayTestCase(unittest.TestCase):
    def assertArrayClose(self, a, b, atol=1e-12, rtol=1e-12):
        npa, npb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        self.assertEqual(npa.shape, npb.shape, 'Array shape mismatch')
        self.assertTrue(
                np.allclose(npa, npb, atol=atol, rtol=rtol),
                'Array close check failed\n{}\n{}\nadiff={}, rdiff={}'.format(
                    a, b, np.abs(npa - npb).max(), np.abs((npa - npb) / np.fmax(np.abs(npb), 1e-300)).max())
        )

    def assertWithinSE(self, estimate, expected, se, k=3.0, msg=None):
        """|estimate - expected| <= k standard errors."""
        self.assertLessEqual(abs(estimate - expected), k * se,
                             msg or f'{estimate} differs from {expected} by more than {k} SE ({se})')
