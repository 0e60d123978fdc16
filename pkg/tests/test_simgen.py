"""Simulation generators and the trial covariate builder."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from alqpanel import (
    DataError,
    ParameterError,
    ProgabideRecord,
    gen_study1,
    gen_study2,
    progabide_covariates,
    validate_dataset,
)


class TestStudy1:
    def test_default_dimensions(self):
        data, truth = gen_study1()
        assert data.n_total == 100
        assert data.n_subjects == 20
        assert data.k == 3 and data.l == 1
        assert truth.beta_true.tolist() == [1.0, 3.0, 5.0]
        assert truth.alpha_true.shape == (20, 1)
        assert validate_dataset(data) == []

    def test_unit_rate_hook(self):
        data, _ = gen_study1(
            n_subjects=2000, n_per=5, seed=6, beta_true=(0.0, 0.0, 0.0), intercept_sd=0.0
        )
        assert data.counts.mean() == pytest.approx(1.0, rel=0.05)

    def test_seed_determinism(self):
        a, _ = gen_study1(seed=12)
        b, _ = gen_study1(seed=12)
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.x_all, b.x_all)

    def test_distinct_seeds_differ(self):
        base, _ = gen_study1(seed=0)
        assert any(
            not np.array_equal(base.counts, gen_study1(seed=s)[0].counts)
            for s in range(1, 6)
        )

    def test_counts_right_skewed(self):
        data, _ = gen_study1(seed=3)
        assert data.counts.min() >= 0
        assert stats.skew(data.counts) > 0.0

    def test_count_cap_enforced(self):
        with pytest.raises(ParameterError):
            gen_study1(seed=0, beta_true=(10.0, 10.0, 10.0))


class TestStudy2:
    def test_default_dimensions(self):
        data, truth = gen_study2()
        assert data.n_total == 100
        assert data.k == 3 and data.l == 2
        assert truth.alpha_true.shape == (20, 2)
        assert truth.design == "random_intercept_slope"

    def test_random_slope_covariate_support(self):
        data, _ = gen_study2(seed=4)
        assert np.allclose(data.s_all[:, 0], 1.0)
        s1 = data.s_all[:, 1]
        assert np.all((s1 >= 0.0) & (s1 < 1.0))

    def test_seed_determinism(self):
        a, _ = gen_study2(n_subjects=10, n_per=3, seed=9)
        b, _ = gen_study2(n_subjects=10, n_per=3, seed=9)
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.s_all, b.s_all)


class TestProgabideCovariates:
    def record(self, **kwargs) -> ProgabideRecord:
        defaults = dict(subject="s1", seizures=4, baseline=8.0, age=30.0, treatment=1, visit=1)
        defaults.update(kwargs)
        return ProgabideRecord(**defaults)

    def test_covariate_arithmetic(self):
        rec = self.record(baseline=8.0, age=math.exp(3.0), treatment=1, visit=4)
        data = progabide_covariates([rec])
        expected = [1.0, math.log(2.0), 1.0, 3.0, 1.0, math.log(2.0)]
        assert np.allclose(data.x_all[0], expected, atol=1e-12)
        assert data.k == 6 and data.l == 1

    def test_placebo_zeroes_interaction(self):
        data = progabide_covariates([self.record(treatment=0, baseline=20.0)])
        assert data.x_all[0, 2] == 0.0
        assert data.x_all[0, 5] == 0.0

    def test_early_visit_indicator(self):
        data = progabide_covariates([self.record(visit=2)])
        assert data.x_all[0, 4] == 0.0

    def test_visit_random_effect_design(self):
        recs = [self.record(visit=1), self.record(visit=4)]
        data = progabide_covariates(recs, random_model="intercept_visit")
        assert data.l == 2
        assert data.s_all.tolist() == [[1.0, 0.0], [1.0, 1.0]]

    def test_groups_by_subject_in_first_appearance_order(self):
        recs = [
            self.record(subject="b", visit=1),
            self.record(subject="a", visit=1),
            self.record(subject="b", visit=2),
        ]
        data = progabide_covariates(recs)
        assert [blk.subject_id for blk in data.subjects] == ["b", "a"]
        assert data.subjects[0].n_obs == 2

    @pytest.mark.parametrize(
        "bad,fragment",
        [
            ({"baseline": 0.0}, "baseline"),
            ({"age": -1.0}, "age"),
            ({"visit": 5}, "visit"),
            ({"seizures": -2}, "seizure"),
        ],
    )
    def test_ingestion_errors_carry_record_index(self, bad, fragment):
        records = [self.record(), self.record(**bad)]
        with pytest.raises(DataError) as excinfo:
            progabide_covariates(records)
        msg = str(excinfo.value)
        assert "record 1" in msg and fragment in msg

    def test_unknown_random_model(self):
        with pytest.raises(ParameterError):
            progabide_covariates([self.record()], random_model="slopes")
