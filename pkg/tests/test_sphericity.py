# Python imports
import dataclasses
import unittest
import os
import sys

# 3rd party imports
import numpy as np
from hypothesis import given, strategies as st
from scipy import stats

# Project imports
import sncov
from sncov import datagen, spectra, sphericity
# Hack -- add tests directory to sys.path so Python 3 can find base.py.
sys.path.insert(0, os.path.join(os.getcwd(), 'tests'))
import base as tests_base  # noqa


class TestSelector(tests_base.Base):
    """Exercise TestSelector"""
    def test_parse(self):
        """test reading and writing test names"""
        self.assertEqual(sphericity.TestSelector.parse('LR-SN'), sphericity.LR_SN)
        self.assertEqual(sphericity.TestSelector.parse('jhn-sn'), sphericity.JHN_SN)
        selector = sphericity.TestSelector.parse('moment:4')
        self.assertEqual(selector.k, 4)
        self.assertEqual(str(selector), 'moment:4')
        self.assertEqual(selector.label, 'MOMENT_K(4)')
        self.assertEqual(sphericity.JHN_SN.label, 'JHN_SN')

    def test_bad_names(self):
        """test that unknown tests and orders are rejected"""
        for text in ('john', 'moment:1', 'moment:9', 'moment:x'):
            self.assertRaises(sncov.DomainError, sphericity.TestSelector.parse, text)


class TestReports(tests_base.Base):
    """Exercise the report fields common to all tests"""
    def test_p_value(self):
        """test p = 2(1 - Φ(|z|)) and reject ⇔ p < alpha"""
        for seed in range(5):
            obs = tests_base.make_panel(30, 60, seed=seed)
            for report in (sphericity.test_lr_sn(obs), sphericity.test_jhn_sn(obs),
                           sphericity.test_moment_k(obs, 3), sphericity.test_jhn_sn(obs, alpha=0.5)):
                self.assertClose(report.p_value, 2 * (1 - stats.norm.cdf(abs(report.z))), abs_tol=1e-12)
                self.assertEqual(report.reject, report.p_value < report.alpha)
                self.assertEqual((report.p, report.n, report.y_n), (30, 60, 0.5))
                self.assertEqual(report.target, 'identity')

    def test_identity_panel(self):
        """test that S = I gives z = (1 - p)/2 and a rejection"""
        report = sphericity.test_jhn_sn(spectra.ObservationMatrix(np.eye(10)))
        self.assertAlmostEqual(report.z, -4.5, places=12)
        self.assertLess(report.p_value, 1e-4)
        self.assertTrue(report.reject)

    def test_report_dict(self):
        """test that a report serializes to a flat dict"""
        report = sphericity.test_jhn_sn(tests_base.make_panel(5, 10))
        d = report.to_dict()
        self.assertEqual(set(d), {'test_name', 'statistic', 'z', 'p_value', 'alpha', 'reject',
                                  'p', 'n', 'y_n', 'target'})
        self.assertEqual(d['test_name'], 'JHN_SN')

    def test_bad_alpha(self):
        """test that alpha outside (0, 1) is rejected"""
        obs = tests_base.make_panel(5, 10)
        for alpha in (0, 1, -0.1, 1.5):
            self.assertRaises(sncov.DomainError, sphericity.test_jhn_sn, obs, alpha)


class TestStatistics(tests_base.Base):
    """Exercise the three tests"""
    def test_lr_regime(self):
        """test that LR-SN refuses p >= n"""
        obs = tests_base.make_panel(300, 200)
        self.assertRaises(sncov.UnsupportedRegimeError, sphericity.test_lr_sn, obs)
        self.assertRaises(sncov.UnsupportedRegimeError, sphericity.test_lr_sn, tests_base.make_panel(20, 20))

    def test_lr_statistic(self):
        """test that the LR-SN statistic is the log-determinant"""
        obs = tests_base.make_panel(20, 50, seed=2)
        report = sphericity.test_lr_sn(obs)
        eigenvalues = spectra.snc_eigenvalues(obs).eigenvalues
        self.assertClose(report.statistic, np.sum(np.log(eigenvalues)), abs_tol=1e-9)

    def test_moment_two_is_john(self):
        """test that MOMENT_K(2) and JHN-SN agree on 100 panels"""
        for seed in range(100):
            rng = np.random.default_rng(seed)
            p = int(rng.integers(5, 40))
            n = int(rng.integers(5, 40))
            obs = tests_base.make_panel(p, n, seed=seed)
            moment = sphericity.test_moment_k(obs, 2)
            john = sphericity.test_jhn_sn(obs)
            self.assertClose(moment.z, john.z, abs_tol=1e-10)
            self.assertEqual(moment.reject, john.reject)

    def test_moment_orders(self):
        """test that orders outside [2, 8] are rejected"""
        obs = tests_base.make_panel(10, 20)
        for k in (1, 9):
            self.assertRaises(sncov.DomainError, sphericity.test_moment_k, obs, k)

    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(20, 40), (40, 20), (15, 60)]))
    def test_scale_invariance(self, seed, shape):
        """test that rescaling observations by positive constants leaves z alone"""
        p, n = shape
        obs = tests_base.make_panel(p, n, seed)
        scales = np.random.default_rng(seed).lognormal(0, 2, n)
        scaled = spectra.ObservationMatrix(obs.data * scales)
        tests = [sphericity.test_jhn_sn, lambda o: sphericity.test_moment_k(o, 3)]
        if p < n:
            tests.append(sphericity.test_lr_sn)
        for test in tests:
            self.assertClose(test(scaled).z, test(obs).z, abs_tol=1e-10)

    def test_elliptical_matches_iid(self):
        """test that elliptical scales don't change the statistic"""
        sigma = datagen.SigmaSpec(40)
        iid = datagen.gen_panel(datagen.GenModel(datagen.ModelKind.IID_GAUSSIAN, sigma, 40, 80, 7))
        elliptical = datagen.gen_panel(datagen.GenModel(datagen.ModelKind.ELLIPTICAL, sigma, 40, 80, 7))
        self.assertClose(sphericity.test_lr_sn(iid).z, sphericity.test_lr_sn(elliptical).z, abs_tol=1e-10)


class TestProportionalTo(tests_base.Base):
    """Exercise TargetSpec and test_proportional_to()"""
    def test_identity_target(self):
        """test that the identity target gives the plain test"""
        obs = tests_base.make_panel(20, 40, seed=4)
        report = sphericity.test_proportional_to(obs, sphericity.TargetSpec.identity())
        self.assertEqual(dataclasses.replace(report, target='identity'), sphericity.test_jhn_sn(obs))

    def test_diagonal_fours(self):
        """test that a constant diagonal target is the identity up to scale"""
        obs = tests_base.make_panel(20, 40, seed=4)
        report = sphericity.test_proportional_to(obs, sphericity.TargetSpec.diagonal(np.full(20, 4.0)))
        self.assertEqual(report.target, 'diagonal')
        self.assertClose(report.z, sphericity.test_jhn_sn(obs).z, abs_tol=1e-12)

    def test_diagonal_whitening(self):
        """test that whitening by the true diagonal undoes it"""
        rng = np.random.default_rng(8)
        d = rng.uniform(0.5, 4.0, 25)
        z = rng.standard_normal((25, 60))
        obs = spectra.ObservationMatrix(np.sqrt(d)[:, None] * z)
        report = sphericity.test_proportional_to(obs, sphericity.TargetSpec.diagonal(d), sphericity.LR_SN)
        self.assertClose(report.z, sphericity.test_lr_sn(spectra.ObservationMatrix(z)).z, abs_tol=1e-10)

    def test_full_matches_diagonal(self):
        """test that a full target equal to a diagonal one gives the same report"""
        obs = tests_base.make_panel(15, 30, seed=9)
        d = np.linspace(1, 3, 15)
        full = sphericity.test_proportional_to(obs, sphericity.TargetSpec.full(np.diag(d)))
        diagonal = sphericity.test_proportional_to(obs, sphericity.TargetSpec.diagonal(d))
        self.assertEqual(full.target, 'full')
        self.assertClose(full.z, diagonal.z, abs_tol=1e-10)

    def test_full_whitening(self):
        """test that whitening by a Toeplitz target undoes it"""
        sigma = datagen.SigmaSpec(20, 0.5)
        z = np.random.default_rng(10).standard_normal((20, 50))
        obs = spectra.ObservationMatrix(datagen.sigma_sqrt(sigma) @ z)
        report = sphericity.test_proportional_to(obs, sphericity.TargetSpec.full(sigma.matrix()))
        # Σ^(-1/2) L is orthogonal, and the statistic is rotation invariant.
        self.assertClose(report.z, sphericity.test_jhn_sn(spectra.ObservationMatrix(z)).z, abs_tol=1e-9)

    def test_bad_targets(self):
        """test that degenerate targets are rejected"""
        obs = tests_base.make_panel(3, 6)
        self.assertRaises(sncov.DomainError, sphericity.TargetSpec.diagonal, [1.0, 0.0, 2.0])
        self.assertRaises(sncov.DomainError, sphericity.TargetSpec.full, [[1.0, 2.0], [0.0, 1.0]])
        singular = sphericity.TargetSpec.full(np.ones((3, 3)))
        self.assertRaises(sncov.DomainError, sphericity.test_proportional_to, obs, singular)
        wrong_size = sphericity.TargetSpec.diagonal(np.ones(4))
        self.assertRaises(sncov.DomainError, sphericity.test_proportional_to, obs, wrong_size)


class TestNullBehavior(tests_base.Base):
    """Long runs of the tests under the null and under a Toeplitz alternative"""
    def panels(self, key, count, p, n, kind=datagen.ModelKind.IID_GAUSSIAN, rho=0.0):
        sigma = datagen.SigmaSpec(p, rho)
        for replication in range(count):
            seed = datagen.derive_seed(7, key, replication)
            yield datagen.gen_panel(datagen.GenModel(kind, sigma, p, n, seed))

    @unittest.skipUnless(tests_base.RUN_SLOW_TESTS, tests_base.SLOW_SKIP_MSG)
    def test_uniform_p_values(self):
        """test that null p-values of JHN-SN look uniform over 5000 iid Gaussian panels"""
        p_values = [sphericity.test_jhn_sn(obs).p_value for obs in self.panels('uniformity', 5000, 100, 200)]
        self.assertGreater(stats.kstest(p_values, 'uniform').pvalue, 0.01)

    @unittest.skipUnless(tests_base.RUN_SLOW_TESTS, tests_base.SLOW_SKIP_MSG)
    def test_jhn_mean(self):
        """test that the JHN-SN statistic averages near zero at p = 200, n = 400"""
        z = [sphericity.test_jhn_sn(obs).z for obs in self.panels('jhn-mean', 2000, 200, 400)]
        self.assertLess(abs(np.mean(z)), 0.1)

    @unittest.skipUnless(tests_base.RUN_SLOW_TESTS, tests_base.SLOW_SKIP_MSG)
    def test_moment_three_size(self):
        """test the null rejection rate of the moment-3 test"""
        rejections = [sphericity.test_moment_k(obs, 3).reject for obs in self.panels('moment-3', 5000, 100, 200)]
        self.assertClose(np.mean(rejections), 0.05, abs_tol=0.015)

    @unittest.skipUnless(tests_base.RUN_SLOW_TESTS, tests_base.SLOW_SKIP_MSG)
    def test_moment_three_power(self):
        """test that the moment-3 test detects Toeplitz(0.1) at p = 500, n = 1000"""
        rejections = [sphericity.test_moment_k(obs, 3).reject
                      for obs in self.panels('moment-3-power', 200, 500, 1000, rho=0.1)]
        self.assertGreater(np.mean(rejections), 0.5)

    @unittest.skipUnless(tests_base.RUN_SLOW_TESTS, tests_base.SLOW_SKIP_MSG)
    def test_diagonal_target_size(self):
        """test the size of JHN-SN against the true diagonal of elliptical panels"""
        d = np.linspace(0.5, 4.0, 100)
        target = sphericity.TargetSpec.diagonal(d)
        rejections = []
        for obs in self.panels('diagonal-size', 2000, 100, 200, kind=datagen.ModelKind.ELLIPTICAL):
            scaled = spectra.ObservationMatrix(np.sqrt(d)[:, None] * obs.data)
            rejections.append(sphericity.test_proportional_to(scaled, target).reject)
        self.assertClose(np.mean(rejections), 0.05, abs_tol=0.015)


if __name__ == '__main__':
    unittest.main()
