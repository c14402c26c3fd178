import unittest

from tfbm import settings
from tfbm.covariance import ProcessKind, ProcessSpec
from tfbm.errors import ParameterError
from tfbm.presets import figure_preset, hurst_alternatives, list_presets, preset_name


class PresetTestCase(unittest.TestCase):
    def testNames(self):
        self.assertEqual(preset_name('tfbm1', 0.3, 2.0), 'fig-tfbm1-H03-l2')
        self.assertEqual(preset_name(ProcessKind.TFBM_III, 0.9, 0.3, 'lambda'), 'fig-tfbm3-H09-l03-lambda')

    def testEveryListedPresetResolves(self):
        names = list_presets()
        self.assertEqual(len(names), 24)
        self.assertEqual(len(set(names)), 24)
        for name in names:
            preset = figure_preset(name)
            self.assertEqual(preset.name, name)
            self.assertEqual(preset_name(preset.null_spec.kind, preset.null_spec.hurst, preset.null_spec.lam,
                                         preset.varying), name)

    def testHurstPreset(self):
        preset = figure_preset('fig-tfbm1-H03-l03')
        self.assertEqual(preset.null_spec, ProcessSpec('tfbm1', 0.3, 0.3))
        self.assertEqual(preset.varying, 'hurst')
        self.assertEqual(preset.sample_lengths, (200, 1000))
        counts = {kind: sum(alt.kind is kind for alt in preset.alternatives) for kind in ProcessKind}
        self.assertEqual(counts, {
            ProcessKind.TFBM_I: 9,
            ProcessKind.TFBM_II: 9,
            ProcessKind.TFBM_III: 4,
            ProcessKind.FBM: 9,
        })
        self.assertTrue(all(alt.lam == 0.3 for alt in preset.alternatives if alt.kind is not ProcessKind.FBM))
        self.assertIn(preset.null_spec, preset.alternatives)

    def testLambdaPreset(self):
        preset = figure_preset('fig-tfbm3-H09-l2-lambda')
        self.assertEqual(preset.varying, 'lambda')
        self.assertEqual([alt.lam for alt in preset.alternatives], list(settings.LAMBDA_GRID))
        self.assertTrue(all(alt.kind is ProcessKind.TFBM_III and alt.hurst == 0.9 for alt in preset.alternatives))

    def testTfbm3AlternativesStayAdmissible(self):
        for alt in hurst_alternatives(2.0):
            if alt.kind is ProcessKind.TFBM_III:
                self.assertGreater(alt.hurst, 0.5)

    def testPaperPrefixIsAccepted(self):
        preset = figure_preset('paper-fig-tfbm2-H07-l03-lambda')
        self.assertEqual(preset.name, 'fig-tfbm2-H07-l03-lambda')
        self.assertEqual(preset, figure_preset('fig-tfbm2-H07-l03-lambda'))
        with self.assertRaises(ParameterError):
            figure_preset('paper-fig-tfbm2-H05-l03')

    def testTimeStepCoversFixedHorizon(self):
        preset = figure_preset('fig-tfbm1-H03-l03')
        self.assertEqual(preset.horizon, 10.0)
        self.assertEqual(preset.dt(200), 0.05)
        self.assertEqual(preset.dt(1000), 0.01)

    def testUnknownPreset(self):
        for name in ('fig-tfbm1-H05-l03', 'fig-tfbm3-H03-l03', 'fig-fbm-H03-l03', 'tfbm1', ''):
            with self.assertRaises(ParameterError, msg=name):
                figure_preset(name)


if __name__ == '__main__':
    unittest.main()
