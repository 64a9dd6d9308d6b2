import unittest
import tempfile
import os
import sys

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from commands.config import RunConfig, parse_axis, parse_mode, read_config_file, resolve_config
from model.errors import ConfigError


class TestRunConfig(unittest.TestCase):
    """Test cases for layered run configuration."""

    def setUp(self):
        """Set up a temporary directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'run.env')

    def tearDown(self):
        """Clean up the temporary directory."""
        self.tmp.cleanup()

    def write(self, text):
        with open(self.path, 'w') as f:
            f.write(text)

    def test_defaults(self):
        """Defaults are K1=31, K2=3, threshold 0.25, center-surround, one job."""
        config = resolve_config()
        self.assertEqual((config.k1, config.k2, config.cr_threshold), (31.0, 3.0, 0.25))
        self.assertEqual(config.mode, 'cs')
        self.assertEqual(config.jobs, 1)
        self.assertTrue(config.include_approximation)
        self.assertEqual(config.scaling_params().k1, 31.0)

    def test_file_values(self):
        """Config files set typed values; keys are case- and dash-insensitive."""
        self.write("K1=20\nmode=WIN5\njobs=2\ninclude-approximation=false\n# comment\nformat=csv\n")
        values = read_config_file(self.path)
        self.assertEqual(values, {'k1': 20.0, 'mode': 'win5', 'jobs': 2,
                                  'include_approximation': False, 'format': 'csv'})

    def test_flags_override_file(self):
        """Explicit flags win over the file; unset flags leave file values alone."""
        self.write("k1=20\nk2=5\n")
        config = resolve_config(self.path, k1=25.0, k2=None)
        self.assertEqual((config.k1, config.k2), (25.0, 5.0))

    def test_unknown_key(self):
        """Unknown settings are rejected."""
        self.write("k3=1\n")
        with self.assertRaises(ConfigError):
            read_config_file(self.path)

    def test_bad_values(self):
        """Values that do not parse as their type are rejected."""
        for text in ("jobs=many\n", "k1=nan\n", "plcc_raw=maybe\n", "mode=win9\n"):
            self.write(text)
            with self.assertRaises(ConfigError):
                read_config_file(self.path)

    def test_invalid_combinations(self):
        """Zero jobs, unknown formats and negative gains are configuration errors."""
        for overrides in ({'jobs': 0}, {'format': 'xml'}, {'k2': -1.0}, {'boundary': 'zero'}):
            with self.assertRaises(ConfigError):
                RunConfig(**overrides)

    def test_missing_file(self):
        """A config path that does not exist is an error."""
        with self.assertRaises(ConfigError):
            resolve_config(os.path.join(self.tmp.name, 'none.env'))


class TestParsers(unittest.TestCase):
    """Test cases for axis and mode parsing."""

    def test_range_axis_is_inclusive(self):
        """start:stop:step includes the stop value."""
        self.assertEqual(parse_axis('29:35:2'), [29.0, 31.0, 33.0, 35.0])
        self.assertEqual(parse_axis('0.1:0.3:0.1'), [0.1, 0.2, 0.3])

    def test_literal_axis(self):
        """Single values and comma lists are taken as given."""
        self.assertEqual(parse_axis('31'), [31.0])
        self.assertEqual(parse_axis('1, 3,7'), [1.0, 3.0, 7.0])

    def test_bad_axis(self):
        """Malformed axes are configuration errors."""
        for text in ('1:2', '5:1:1', '1:5:0', 'a,b', ''):
            with self.assertRaises(ConfigError):
                parse_axis(text)

    def test_mode(self):
        """Modes are case-insensitive."""
        self.assertEqual(parse_mode(' WIN3 '), 'win3')
        with self.assertRaises(ConfigError):
            parse_mode('gauss')


if __name__ == '__main__':
    unittest.main()
