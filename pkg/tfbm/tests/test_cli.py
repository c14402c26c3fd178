import contextlib
import io
import os
from pathlib import Path
import tempfile
import unittest
from unittest import mock

import numpy as np

import main
from tfbm import settings, utils
from tfbm.presets import figure_preset


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)
        clean = {k: v for k, v in os.environ.items() if not k.startswith('TFBM_')}
        self._env = mock.patch.dict(os.environ, clean, clear=True)
        self._env.start()

    def tearDown(self):
        self._env.stop()
        self._tmp.cleanup()

    def cli(self, *argv, out=None):
        argv = list(argv) + ['--out', str(out or self.out)]
        with contextlib.redirect_stdout(io.StringIO()) as stdout:
            code = main.main(argv)
        self.stdout = stdout.getvalue()
        return code

    def simulate(self, name='sim', out=None, *extra):
        return self.cli('simulate', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3',
                        '--n', '50', '--m', '5', '--seed', '1', '--name', name, *extra, out=out)

    def testSimulate(self):
        self.assertEqual(self.simulate(), 0)
        batch = utils.read_trajectories(self.out / 'sim_trajectories.csv')
        self.assertEqual(batch.values.shape, (5, 50))
        self.assertEqual(batch.spec.describe(), 'TFBM I(H=0.3, lambda=0.3)')
        manifest = utils.RunManifest.load(self.out / 'sim_manifest.json')
        self.assertEqual(manifest.command, 'simulate')
        self.assertEqual(manifest.seed, 1)
        self.assertIn(str(self.out / 'sim_trajectories.csv'), manifest.outputs)

    def testRerunsAreByteIdentical(self):
        other = self.out / 'again'
        self.assertEqual(self.simulate(), 0)
        self.assertEqual(self.simulate(out=other), 0)
        self.assertEqual((self.out / 'sim_trajectories.csv').read_bytes(),
                         (other / 'sim_trajectories.csv').read_bytes())

    def testReplay(self):
        self.assertEqual(self.simulate(), 0)
        path = self.out / 'sim_trajectories.csv'
        before = path.read_bytes()
        path.unlink()
        with contextlib.redirect_stdout(io.StringIO()):
            self.assertEqual(main.main(['--replay', str(self.out / 'sim_manifest.json')]), 0)
        self.assertEqual(path.read_bytes(), before)

    def testEnvironmentOverride(self):
        self.assertEqual(self.simulate('flag', None, '--seed', '5'), 0)
        with mock.patch.dict(os.environ, {'TFBM_SEED': '5'}):
            self.assertEqual(self.cli('simulate', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3',
                                      '--n', '50', '--m', '5', '--name', 'env'), 0)
        self.assertEqual((self.out / 'flag_trajectories.csv').read_bytes(),
                         (self.out / 'env_trajectories.csv').read_bytes())

    def testReplayIgnoresEnvironment(self):
        with mock.patch.dict(os.environ, {'TFBM_SEED': '7', 'TFBM_DT': '0.5'}):
            self.assertEqual(self.cli('simulate', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3',
                                      '--n', '50', '--m', '5', '--name', 'env'), 0)
        path = self.out / 'env_trajectories.csv'
        before = path.read_bytes()
        path.unlink()
        manifest = utils.RunManifest.load(self.out / 'env_manifest.json')
        self.assertIn('7', manifest.parameters['argv'])
        with contextlib.redirect_stdout(io.StringIO()):
            self.assertEqual(main.main(['--replay', str(self.out / 'env_manifest.json')]), 0)
        self.assertEqual(path.read_bytes(), before)
        batch = utils.read_trajectories(path)
        self.assertEqual((batch.seed, batch.dt), (7, 0.5))

    def testResolvedArgvReproducesArguments(self):
        parser, subparsers = main.build_parser()
        args = parser.parse_args(['power', '--kind', 'fbm', '--hurst', '0.3', '--alt-kind', 'fbm',
                                  '--alt-kind', 'tfbm1', '--alt-hurst', '0.3,0.8', '--stat', 'tamsd',
                                  '--n', '60,100', '--dt', '0.1', '--lambda-is-tau-star', '--no-plot'])
        again = parser.parse_args(main.resolved_argv(subparsers, args))
        self.assertEqual(vars(again), vars(args))

    def testBadEnvironmentValueExitsTwo(self):
        argv = ('simulate', '--kind', 'fbm', '--hurst', '0.5', '--n', '10', '--m', '2')
        for env in ({'TFBM_SEED': 'abc'}, {'TFBM_METHOD': 'bogus'}, {'TFBM_ALT_KIND': 'fbm,tfbm9'}):
            with mock.patch.dict(os.environ, env):
                self.assertEqual(self.cli(*argv), 2, env)

    def testBadThreadCountFallsBack(self):
        with mock.patch.dict(os.environ, {'TFBM_THREADS': 'many'}):
            with self.assertLogs('tfbm', level='WARNING'):
                self.assertEqual(settings.env_int('TFBM_THREADS', 1), 1)
        with mock.patch.dict(os.environ, {'TFBM_THREADS': '3'}):
            self.assertEqual(settings.env_int('TFBM_THREADS', 1), 3)

    def testTestUsesRecordedTimeStep(self):
        self.assertEqual(self.simulate('sim', None, '--dt', '0.25'), 0)
        code = self.cli('test', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3', '--stat', 'tamsd',
                        '--null-draws', '1000', '--input', str(self.out / 'sim_trajectories.csv'), '--name', 't')
        self.assertEqual(code, 0)
        self.assertEqual(utils.read_metadata(self.out / 't_outcome.csv')['dt'], '0.25')
        code = self.cli('test', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3', '--stat', 'tamsd',
                        '--null-draws', '1000', '--input', str(self.out / 'sim_trajectories.csv'), '--name', 'u',
                        '--dt', '2')
        self.assertEqual(code, 0)
        self.assertEqual(utils.read_metadata(self.out / 'u_outcome.csv')['dt'], '2.0')

    def testPaperPresetRuns(self):
        code = self.cli('power', '--preset', 'paper-fig-tfbm1-H03-l03', '--stat', 'tamsd', '--n', '50',
                        '--m', '20', '--null-draws', '1000', '--no-plot', '--name', 'fig')
        self.assertEqual(code, 0)
        rows = utils.read_power(self.out / 'fig_power.csv')
        self.assertEqual(len(rows), len(figure_preset('fig-tfbm1-H03-l03').alternatives))
        self.assertTrue(all(float(row['dt']) == 0.2 for row in rows))
        self.assertEqual(utils.read_metadata(self.out / 'fig_power.csv')['preset'], 'paper-fig-tfbm1-H03-l03')

    def testInvalidParametersExitTwo(self):
        cases = [
            ('simulate', '--kind', 'tfbm3', '--hurst', '0.4', '--lambda', '0.3', '--n', '10', '--m', '2'),
            ('simulate', '--kind', 'fbm', '--hurst', '0.5', '--n', '10', '--m', '0'),
            ('power', '--kind', 'fbm', '--hurst', '0.3', '--m', '0', '--no-plot'),
            ('power', '--kind', 'fbm', '--hurst', '0.3', '--stat', 'dma', '--tau', '1', '--n', '50',
             '--m', '10', '--no-plot'),
            ('power', '--preset', 'fig-tfbm1-H05-l03', '--m', '10'),
            ('qlines', '--kind', 'fbm', '--hurst', '0.5', '--n', '10', '--m', '100', '--probs', '0.5,1.5'),
            ('qlines', '--kind', 'fbm', '--hurst', '0.5', '--n', '10', '--m', '50'),
            ('test', '--kind', 'fbm', '--hurst', '0.5', '--stat', 'tamsd', '--input', str(self.out / 'none.csv')),
        ]
        for argv in cases:
            self.assertEqual(self.cli(*argv), 2, argv)

    def testTest(self):
        self.assertEqual(self.simulate(), 0)
        code = self.cli('test', '--kind', 'tfbm1', '--hurst', '0.3', '--lambda', '0.3', '--stat', 'acvf',
                        '--null-draws', '2000', '--input', str(self.out / 'sim_trajectories.csv'), '--name', 't')
        self.assertEqual(code, 0)
        self.assertIn('increments', self.stdout)
        body = [line for line in (self.out / 't_outcome.csv').read_text().splitlines() if not line.startswith('#')]
        self.assertEqual(len(body), 1 + 5)
        self.assertTrue(all(line.endswith(('accept', 'reject')) for line in body[1:]))
        self.assertTrue((self.out / 't_spectrum.csv').exists())

    def testPower(self):
        argv = ('power', '--kind', 'fbm', '--hurst', '0.3', '--alt-kind', 'fbm', '--alt-hurst', '0.3,0.8',
                '--stat', 'tamsd', '--stat', 'dma', '--n', '60', '--m', '100', '--null-draws', '2000',
                '--seed', '4', '--name', 'p')
        self.assertEqual(self.cli(*argv), 0)
        rows = utils.read_power(self.out / 'p_power.csv')
        self.assertEqual(len(rows), 4)
        self.assertEqual({row['statistic'] for row in rows}, {'tamsd', 'dma'})
        self.assertTrue(all(0 <= row['power'] <= 1 for row in rows))
        self.assertTrue((self.out / 'p_power.svg').exists())

        first = (self.out / 'p_power.csv').read_bytes()
        self.assertEqual(self.cli(*argv, '--no-plot'), 0)
        self.assertEqual((self.out / 'p_power.csv').read_bytes(), first)

    def testQuantileLines(self):
        code = self.cli('qlines', '--kind', 'tfbm2', '--hurst', '0.7', '--lambda', '0.3', '--n', '10', '--m', '100',
                        '--name', 'q')
        self.assertEqual(code, 0)
        body = [line for line in (self.out / 'q_qlines.csv').read_text().splitlines() if not line.startswith('#')]
        self.assertEqual(len(body), 1 + 5 * 10)
        probs = sorted({float(line.split(',')[2]) for line in body[1:]})
        self.assertTrue(np.allclose(probs, [0.05, 0.25, 0.5, 0.75, 0.95]))
        self.assertTrue((self.out / 'q_qlines.svg').exists())

    def testPlotSwitchFromEnvironment(self):
        with mock.patch.dict(os.environ, {'TFBM_PLOT': '0'}):
            code = self.cli('qlines', '--kind', 'fbm', '--hurst', '0.5', '--n', '10', '--m', '100', '--name', 'np')
        self.assertEqual(code, 0)
        self.assertTrue((self.out / 'np_qlines.csv').exists())
        self.assertFalse((self.out / 'np_qlines.svg').exists())


if __name__ == '__main__':
    unittest.main()
