# Python imports
import json
import tempfile
import unittest
import os
import sys
from unittest import mock

# Project imports
import sncov
from sncov import config
# Hack -- add tests directory to sys.path so Python 3 can find base.py.
sys.path.insert(0, os.path.join(os.getcwd(), 'tests'))
import base as tests_base  # noqa


class TestParams(tests_base.Base):
    """Exercise parse_params() and read_params()"""
    def test_types(self):
        """test that values get the type their names call for"""
        params = config.parse_params(['# a comment', '', 'p_list = 100, 200', 'Y_LIST=0.5,2',
                                      'TESTS=lr-sn@0.5,jhn-sn', 'REPLICATIONS=20', 'ALPHA=0.01',
                                      'MODEL=garch-t4', 'DESIGN_NAME=mine'])
        self.assertEqual(params, {'P_LIST': [100, 200], 'Y_LIST': [0.5, 2.0],
                                  'TESTS': ['lr-sn@0.5', 'jhn-sn'], 'REPLICATIONS': 20,
                                  'ALPHA': 0.01, 'MODEL': 'garch-t4', 'DESIGN_NAME': 'mine'})

    def test_malformed(self):
        """test that bad lines are config errors"""
        for line in ('P_LIST', 'P_LIST=1,x', 'REPLICATIONS=2.5', 'ALPHA=low', 'COLOR=red'):
            self.assertRaises(sncov.ConfigError, config.parse_params, [line])

    def test_read_params(self):
        """test reading a params file"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'params.txt')
            with open(path, 'w') as f:
                f.write('MASTER_SEED=7\nSIGMA=toeplitz:0.1\n')
            self.assertEqual(config.read_params(path), {'MASTER_SEED': 7, 'SIGMA': 'toeplitz:0.1'})
            self.assertEqual(config.read_design_file(path), config.read_params(path))

    def test_json_design(self):
        """test that JSON designs come back with params names and types"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'design.json')
            with open(path, 'w') as f:
                json.dump({'p_list': [10, 20], 'alpha': 0.1, 'model': 'iid'}, f)
            self.assertEqual(config.read_design_file(path),
                             {'P_LIST': [10, 20], 'ALPHA': 0.1, 'MODEL': 'iid'})
            with open(path, 'w') as f:
                f.write('[1, 2]')
            self.assertRaises(sncov.ConfigError, config.read_design_file, path)
            with open(path, 'w') as f:
                f.write('{')
            self.assertRaises(sncov.ConfigError, config.read_design_file, path)


class TestGlobalOptions(tests_base.Base):
    """Exercise GlobalOptions and default_threads()"""
    def test_defaults(self):
        """test the default options"""
        with mock.patch.dict(os.environ, {'SNCOV_THREADS': '3'}):
            options = config.GlobalOptions()
        self.assertEqual((options.seed, options.threads, options.out, options.log_level),
                         (None, 3, None, 'WARNING'))
        self.assertWriteToReadOnlyPropertyFails(options, 'seed', 1)

    def test_seed(self):
        """test that seeds must fit in 64 unsigned bits"""
        for seed in (0, 42, 2 ** 64 - 1):
            self.assertEqual(config.GlobalOptions(seed=seed, threads=1).seed, seed)
        for seed in (-1, 2 ** 64, 1.5, True):
            self.assertRaises(sncov.ConfigError, config.GlobalOptions, seed=seed, threads=1)
        self.assertRaises(sncov.ConfigError, config.check_seed, -7, 'MASTER_SEED')

    def test_threads(self):
        """test the environment override and its validation"""
        with mock.patch.dict(os.environ, {'SNCOV_THREADS': ''}):
            self.assertGreaterEqual(config.default_threads(), 1)
        for value in ('0', 'many'):
            with mock.patch.dict(os.environ, {'SNCOV_THREADS': value}):
                self.assertRaises(sncov.ConfigError, config.default_threads)
        self.assertRaises(sncov.ConfigError, config.GlobalOptions, threads=0)
        self.assertRaises(sncov.ConfigError, config.GlobalOptions, threads=1, log_level='LOUD')


if __name__ == '__main__':
    unittest.main()
