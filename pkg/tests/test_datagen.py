import json

import numpy as np
import pytest

from romp.datagen import (
    DesignDistribution,
    SignalScheme,
    assemble_instance,
    sample_design,
    sample_signal,
)
from romp.serialize import dump_instance, load_instance

GAUSS = DesignDistribution("gaussian")
RADEMACHER = DesignDistribution("rademacher")


class TestSampleDesign:
    def test_gaussian_entry_variance_at_scale(self):
        # full-scale generation parameters; sample variance within 5% of 1/n
        X = sample_design(1600, 4000, GAUSS, seed=0)
        v = X.var()
        assert abs(v - 1.0 / 1600) < 0.05 / 1600

    def test_rademacher_entries(self):
        X = sample_design(4, 10, RADEMACHER, seed=1)
        assert set(np.unique(np.abs(X))) == {0.5}

    def test_seed_determinism(self):
        a = sample_design(50, 20, GAUSS, seed=7)
        b = sample_design(50, 20, GAUSS, seed=7)
        assert np.array_equal(a, b)
        c = sample_design(50, 20, GAUSS, seed=8)
        assert not np.array_equal(a, c)

    def test_variance_law_of_large_numbers(self):
        # >= 1e5 entries; sample variance within 3 standard errors of 1/n
        n, p = 400, 300
        X = sample_design(n, p, GAUSS, seed=3)
        var = X.var()
        se = np.sqrt(2.0 / (n * p)) / n  # sd of the variance estimate for Gaussians
        assert abs(var - 1.0 / n) < 3 * se


class TestSampleSignal:
    def test_ones_prescribed_support(self):
        s = sample_signal(10, SignalScheme("ones", k=3, support=(0, 1, 2)), seed=0)
        assert s.support.indices == (0, 1, 2)
        assert np.array_equal(s.values, np.ones(3))

    def test_pm_one_norm(self):
        s = sample_signal(4000, SignalScheme("pm_one", k=10), seed=5)
        assert float(s.values @ s.values) == 10.0

    def test_fixed_values(self):
        s = sample_signal(
            6, SignalScheme("fixed_values", k=2, support=(4, 1), values=(2.0, -3.0)), seed=0
        )
        assert s.support.indices == (1, 4)
        assert np.array_equal(s.values, np.array([-3.0, 2.0]))

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            sample_signal(3, SignalScheme("pm_one", k=5), seed=0)

    def test_random_support_varies(self):
        sups = {
            sample_signal(100, SignalScheme("pm_one", k=4), seed=i).support.indices
            for i in range(8)
        }
        assert len(sups) > 1


class TestAssembleInstance:
    def test_noiseless_rows_satisfy_model(self):
        inst = assemble_instance(30, 5, 20, GAUSS, SignalScheme("pm_one", k=3), 0.0, seed=2)
        from romp.model import dense_expand

        assert np.allclose(inst.y, inst.X @ dense_expand(inst.truth), atol=1e-14)

    def test_paper_scale_parameters(self):
        inst = assemble_instance(1600, 0, 4000, GAUSS, SignalScheme("pm_one", k=10), 2.0, seed=0)
        assert inst.n_total == 1600 and inst.p == 4000 and inst.truth.k == 10

    def test_no_outliers(self):
        inst = assemble_instance(25, 0, 10, GAUSS, SignalScheme("pm_one", k=2), 1.0, seed=4)
        assert inst.outlier_rows == ()
        assert inst.ledger.model == "none"

    def test_noise_scale(self):
        # residual sd within 10% of sigma_e / sqrt(n) for n >= 400
        n, sigma = 400, 1.5
        inst = assemble_instance(n, 0, 1000, GAUSS, SignalScheme("pm_one", k=5), sigma, seed=6)
        from romp.model import dense_expand

        resid = inst.y - inst.X @ dense_expand(inst.truth)
        assert abs(resid.std() - sigma / np.sqrt(n)) < 0.1 * sigma / np.sqrt(n)

    def test_authentic_rows_random_subset(self):
        inst = assemble_instance(10, 5, 8, GAUSS, SignalScheme("pm_one", k=2), 0.5, seed=9)
        assert inst.n_authentic == 10 and inst.n_outliers == 5
        assert set(inst.authentic_rows) | set(inst.outlier_rows) == set(range(15))

    def test_byte_identical_instances(self):
        a = assemble_instance(20, 3, 15, GAUSS, SignalScheme("pm_one", k=2), 1.0, seed=11)
        b = assemble_instance(20, 3, 15, GAUSS, SignalScheme("pm_one", k=2), 1.0, seed=11)
        assert a.X.tobytes() == b.X.tobytes()
        assert a.y.tobytes() == b.y.tobytes()
        assert a.authentic_rows == b.authentic_rows


class TestSerialization:
    def test_lossless_roundtrip(self):
        inst = assemble_instance(12, 2, 9, GAUSS, SignalScheme("pm_one", k=3), 0.7, seed=13)
        text = dump_instance(inst)
        back = load_instance(text)
        assert back.X.tobytes() == inst.X.tobytes()
        assert back.y.tobytes() == inst.y.tobytes()
        assert back.truth.support.indices == inst.truth.support.indices
        assert back.truth.values.tobytes() == inst.truth.values.tobytes()
        assert back.authentic_rows == inst.authentic_rows
        assert back.ledger.model == inst.ledger.model

    def test_roundtrip_preserves_attacked_ledger(self):
        from romp.corruption import attack_sco

        inst = assemble_instance(15, 3, 12, GAUSS, SignalScheme("pm_one", k=2), 0.5, seed=17)
        att = attack_sco(inst, 100.0, seed=1)
        back = load_instance(dump_instance(att))
        assert np.array_equal(back.ledger.x_mask, att.ledger.x_mask)
        assert np.array_equal(back.ledger.y_mask, att.ledger.y_mask)
        assert back.ledger.attack_name == "sco"
        assert back.X.tobytes() == att.X.tobytes()

    def test_schema_fields(self):
        inst = assemble_instance(5, 0, 4, GAUSS, SignalScheme("pm_one", k=1), 0.0, seed=0)
        doc = json.loads(dump_instance(inst))
        assert doc["format"] == "robust-regression-instance"
        assert doc["n"] == 5 and doc["n1"] == 0 and doc["p"] == 4
        assert len(doc["X"]) == 5 and len(doc["X"][0]) == 4
