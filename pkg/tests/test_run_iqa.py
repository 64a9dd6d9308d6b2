import unittest
import tempfile
import io
import json
import os
import sys
from unittest import mock

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from run_iqa import main
from bench.synthetic import pink_noise_image
from data.create_synthetic_manifest import SyntheticDatasetCreator
from model.color_space import save_image


class TestRunIqa(unittest.TestCase):
    """Test cases for the command line front end."""

    def setUp(self):
        """Set up a temporary directory with a reference, a distorted image and a manifest."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name
        self.ref = os.path.join(self.dir, 'ref.png')
        self.dist = os.path.join(self.dir, 'dist.png')
        save_image(pink_noise_image(128, 128, seed=51), self.ref)
        save_image(pink_noise_image(128, 128, seed=52), self.dist)

    def tearDown(self):
        """Clean up the temporary directory."""
        self.tmp.cleanup()

    def run_main(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with mock.patch('sys.stdout', stdout), mock.patch('sys.stderr', stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()

    def synthetic_manifest(self):
        creator = SyntheticDatasetCreator(os.path.join(self.dir, 'synthetic'), size=128, seed=3)
        with mock.patch('sys.stdout', io.StringIO()):
            return creator.create_dataset(n_refs=1, levels=5)

    def test_score_identical_pair(self):
        """An image scored against itself prints e = 0."""
        code, out, _ = self.run_main('score', self.ref, self.ref)
        self.assertEqual(code, 0)
        result = json.loads(out)
        self.assertEqual(result['e'], 0.0)
        self.assertEqual(result['params']['k1'], 31.0)

    def test_score_flags(self):
        """Scaling flags reach the score."""
        code, out, _ = self.run_main('score', self.ref, self.dist, '--k1', '10', '--mode', 'win3')
        self.assertEqual(code, 0)
        result = json.loads(out)
        self.assertEqual(result['params']['k1'], 10.0)
        self.assertEqual(result['params']['mode'], 'win3')
        self.assertGreater(result['e'], 0.0)

    def test_exit_codes(self):
        """I/O, dimension and configuration failures map to exit codes 2, 3 and 4."""
        small = os.path.join(self.dir, 'small.png')
        save_image(pink_noise_image(128, 160, seed=1), small)

        code, _, err = self.run_main('score', self.ref, os.path.join(self.dir, 'missing.png'))
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(err.strip().splitlines()[-1])['type'], 'ImageNotFoundError')

        code, _, _ = self.run_main('score', self.ref, small)
        self.assertEqual(code, 3)

        code, _, _ = self.run_main('score', self.ref, self.dist, '--k1', '-1')
        self.assertEqual(code, 4)

        code, _, _ = self.run_main('score', self.ref, self.dist, '--jobs', '0')
        self.assertEqual(code, 4)

    def test_rejected_flag_values_are_config_errors(self):
        """Values the argument parser rejects exit with the configuration code."""
        for flags in (['--mode', 'win4'], ['--k1', 'abc'], ['--format', 'xml']):
            code, _, err = self.run_main('score', self.ref, self.dist, *flags)
            self.assertEqual(code, 4, flags)
            self.assertEqual(json.loads(err.strip().splitlines()[-1])['type'], 'ConfigError')

        code, _, _ = self.run_main('distort', self.ref, 'smear', '3', '--out', self.dir)
        self.assertEqual(code, 4)

    def test_features_dump(self):
        """The features command writes the dump and optional diagnostics."""
        out = os.path.join(self.dir, 'ref.ciiqf')
        png = os.path.join(self.dir, 'norm.png')
        scaling = os.path.join(self.dir, 'scaling.csv')
        code, stdout, _ = self.run_main('features', self.ref, '--out', out,
                                        '--normalized-png', png, '--scaling-csv', scaling)
        self.assertEqual(code, 0)
        self.assertTrue(os.path.isfile(png))
        with open(out, 'rb') as f:
            self.assertEqual(f.read(5), b'CIIQF')
        with open(scaling) as f:
            self.assertEqual(len(f.read().splitlines()), 1 + 63)
        self.assertEqual(json.loads(stdout)['segments'], 66)

    def test_sweep_grid_csv(self):
        """A 4x4 sweep prints a header and sixteen cells."""
        manifest = self.synthetic_manifest()
        code, out, _ = self.run_main('sweep', manifest, '--k1', '29:35:2', '--k2', '1:7:2')
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], 'k1,k2,srcc,krcc,plcc')
        self.assertEqual(len(lines), 17)

    def test_single_cell_sweep_matches_bench(self):
        """Bench and a 1x1 sweep at the same K1, K2 agree on SRCC."""
        manifest = self.synthetic_manifest()
        _, bench_out, _ = self.run_main('bench', manifest)
        _, sweep_out, _ = self.run_main('sweep', manifest, '--format', 'json')
        self.assertEqual(json.loads(sweep_out)['cells'][0]['srcc'], json.loads(bench_out)['srcc'])

    def test_bench_jobs_and_out_file(self):
        """Bench output does not depend on the worker count and can go to a file."""
        manifest = self.synthetic_manifest()
        report_path = os.path.join(self.dir, 'report.json')
        code, stdout, _ = self.run_main('bench', manifest, '--jobs', '8', '--out', report_path)
        self.assertEqual(code, 0)
        self.assertEqual(stdout, '')
        _, single, _ = self.run_main('bench', manifest, '--jobs', '1')
        with open(report_path) as f:
            self.assertEqual(f.read(), single)
        self.assertEqual(json.loads(single)['n_pairs'], 20)

        code, summary, _ = self.run_main('summary', report_path, report_path)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(summary)[-1]['dataset'], 'average')

    def test_distort_is_reproducible(self):
        """Two ladders with the same seed are byte-identical."""
        outputs = []
        for name in ('a', 'b'):
            folder = os.path.join(self.dir, name)
            code, _, _ = self.run_main('distort', self.ref, 'gaussian_noise', '3', '--seed', '7',
                                       '--out', folder, '--manifest', 'ladder.csv')
            self.assertEqual(code, 0)
            with open(os.path.join(folder, 'ref_gaussian_noise_3.png'), 'rb') as f:
                outputs.append(f.read())
            self.assertTrue(os.path.isfile(os.path.join(folder, 'ladder.csv')))
        self.assertEqual(outputs[0], outputs[1])

    def test_config_file(self):
        """A config file sets values that flags can override."""
        config = os.path.join(self.dir, 'run.env')
        with open(config, 'w') as f:
            f.write("k1=12\nk2=2\n")
        _, out, _ = self.run_main('score', self.ref, self.dist, '--config', config, '--k2', '4')
        params = json.loads(out)['params']
        self.assertEqual((params['k1'], params['k2']), (12.0, 4.0))


if __name__ == '__main__':
    unittest.main()
