import json
import math

import numpy as np
import pytest

from vocdm import fresnel
from vocdm.errors import BudgetExceededError, ConfigError
from vocdm.harness import cli
from vocdm.harness.config import DEFAULTS, default_config, from_mapping, load_config
from vocdm.harness.experiments import (
    derive_seed,
    run_ber_sweep,
    run_experiment,
    run_papr_ccdf,
    run_papr_table,
)
from vocdm.harness.records import CSV_COLUMNS, ResultRecord, from_csv, to_csv, to_json, wilson_interval
from vocdm.harness.verify import check_fresnel_commutation, run_verify

# two-sided 95% normal quantile
Z95 = 1.959963984540054


def ber_cfg(**kw):
    base = {
        "experiment": "ber",
        "id": "t-ber",
        "constellation": "qpsk",
        "schemes": [{"M": 2, "N": 2}, {"M": 4, "N": 1}],
        "channel": {"L": 1, "Q": 0},
        "snr_db": [4.0, 8.0],
        "trials": 40,
        "batch": 7,
        "seed": 3,
    }
    base.update(kw)
    return from_mapping(base)


class TestConfig:
    def test_defaults_load(self):
        for name in DEFAULTS:
            cfg = default_config(name)
            assert cfg.experiment == name

    def test_yaml(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "experiment: ber\nschemes:\n  - {M: 2, N: 4}\n  - [8, 1]\nchannel: {L: 1, Q: 1, covariance: iid}\n"
            "snr_db: [10, .inf]\ntrials: 5\n"
        )
        cfg = load_config(path)
        assert cfg.K == 8 and cfg.schemes[1].label == "SC(8,1)"
        assert math.isinf(cfg.snr_db[1])
        assert cfg.id == "ber"

    def test_physical_channel(self):
        cfg = ber_cfg(schemes=[{"M": 2, "N": 4}], channel={"tau_max": 1.5e-6, "f_max": 100.0, "T_s": 1e-6})
        assert cfg.channel_grid() == (1, 1)

    def test_covariance_list(self):
        cfg = ber_cfg(channel={"L": 1, "Q": 0, "covariance": [0.75, 0.25]})
        np.testing.assert_allclose(cfg.channel_spec().R_h, np.diag([0.75, 0.25]))

    @pytest.mark.parametrize(
        "change",
        [
            {"experiment": "nope"},
            {"trials": 0},
            {"snr_db": []},
            {"schemes": []},
            {"schemes": [{"M": 2, "N": 2}, {"M": 3, "N": 1}]},
            {"constellation": "8psk"},
            {"detector": "zf"},
            {"format": "xml"},
            {"channel": {"L": 1, "Q": 0, "covariance": [1.0]}},
            {"channel": {"tau_max": 1.0}},
            {"bogus": 1},
            {"schemes": [{"M": 2}]},
            {"detector": "mmse", "snr_db": [float("inf")]},
        ],
    )
    def test_rejects(self, change):
        with pytest.raises(ConfigError):
            ber_cfg(**change)

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("experiment: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_replace_skips_none(self):
        cfg = ber_cfg()
        assert cfg.replace(seed=None, workers=3).seed == 3
        assert cfg.replace(workers=3).workers == 3


class TestRecords:
    def test_wilson_against_closed_form(self):
        for k, n in ((0, 10), (3, 10), (10, 10), (41, 32000), (500, 1000)):
            p = k / n
            denom = 1 + Z95**2 / n
            centre = (p + Z95**2 / (2 * n)) / denom
            half = Z95 * math.sqrt(p * (1 - p) / n + Z95**2 / (4 * n * n)) / denom
            lo, hi = wilson_interval(k, n)
            assert abs(lo - max(0, centre - half)) < 1e-12 and abs(hi - min(1, centre + half)) < 1e-12

    def test_wilson_known_value(self):
        # 5 of 10: interval (0.2366, 0.7634)
        lo, hi = wilson_interval(5, 10)
        assert abs(lo - 0.23659309) < 1e-6 and abs(hi - 0.76340691) < 1e-6

    def test_csv_round_trip(self):
        recs = run_ber_sweep(ber_cfg(trials=5))
        text = to_csv(recs)
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
        assert from_csv(text) == recs

    def test_json_non_finite(self):
        r = ResultRecord("x", "s", 1, 2, "fresnel", "bpsk", "N", 2.0, "y", math.nan, 1, 0, math.inf, 0)
        row = json.loads(to_json([r]))[0]
        assert row["y_value"] is None and row["ci_halfwidth"] == "inf"


class TestBer:
    def test_noiseless_is_error_free(self):
        recs = run_ber_sweep(ber_cfg(snr_db=[float("inf")], trials=30))
        assert all(r.y_value == 0 and r.errors == 0 for r in recs)

    def test_records(self):
        cfg = ber_cfg()
        recs = run_ber_sweep(cfg)
        assert len(recs) == 4
        for r in recs:
            assert 0 <= r.y_value <= 1
            assert r.trials == 40 and r.seed == 3
            bits = 40 * 4 * 2
            assert r.y_value == r.errors / bits
            lo, hi = wilson_interval(r.errors, bits)
            assert r.ci_halfwidth == pytest.approx((hi - lo) / 2)

    def test_more_noise_more_errors(self):
        recs = run_ber_sweep(ber_cfg(snr_db=[0.0, 20.0], trials=100))
        assert recs[0].errors > recs[1].errors

    def test_worker_count_invariant(self):
        a = to_csv(run_ber_sweep(ber_cfg(workers=1)))
        b = to_csv(run_ber_sweep(ber_cfg(workers=2)))
        assert a == b

    def test_seed_changes_result(self):
        a = run_ber_sweep(ber_cfg(seed=1, snr_db=[0.0], trials=50))
        b = run_ber_sweep(ber_cfg(seed=2, snr_db=[0.0], trials=50))
        assert [r.errors for r in a] != [r.errors for r in b]

    def test_budget_names_scheme(self):
        cfg = ber_cfg(schemes=[{"M": 2, "N": 8}], budget=4**10)
        with pytest.raises(BudgetExceededError, match=r"VOCDM\(2,8\)"):
            run_ber_sweep(cfg)

    def test_mmse_path(self):
        recs = run_ber_sweep(ber_cfg(detector="mmse", snr_db=[30.0], trials=20))
        assert all(r.y_value < 0.05 for r in recs)

    def test_derive_seed_stable(self):
        a = np.random.default_rng(derive_seed(1, "x", 0, 5)).integers(0, 2**32)
        b = np.random.default_rng(derive_seed(1, "x", 0, 5)).integers(0, 2**32)
        c = np.random.default_rng(derive_seed(1, "x", 0, 6)).integers(0, 2**32)
        assert a == b != c


class TestPaprDrivers:
    def test_ccdf(self):
        cfg = from_mapping(
            {
                "experiment": "papr-ccdf",
                "constellation": "bpsk",
                "schemes": [{"M": 16, "N": 4}, {"M": 1, "N": 64}, {"M": 64, "N": 1}],
                "gamma_db": [0.0, 3.0, 6.0, 9.0],
                "trials": 500,
                "batch": 128,
                "seed": 2,
            }
        )
        recs = run_papr_ccdf(cfg)
        by = {}
        for r in recs:
            by.setdefault((r.scheme, r.y_name), []).append(r)
        vocdm = [r.y_value for r in by[("VOCDM(16,4)", "ccdf")]]
        ocdm = [r.y_value for r in by[("OCDM(1,64)", "ccdf")]]
        assert vocdm == sorted(vocdm, reverse=True)
        assert vocdm[2] < ocdm[2]
        bound = by[("VOCDM(16,4)", "max_papr")][0]
        assert bound.x_value == 4 and bound.y_value <= 4 and bound.errors == 0
        theory = by[("theory(64)", "ccdf")]
        assert len(theory) == 4 and theory[0].y_value == pytest.approx(1.0)
        sc = [r.y_value for r in by[("SC(64,1)", "ccdf")]]
        # constant envelope: PAPR is exactly 1 and the CCDF counts strict exceedances
        assert sc == [0.0, 0.0, 0.0, 0.0]

    def test_table_with_skips(self):
        cfg = from_mapping(
            {
                "experiment": "papr-table",
                "constellations": ["bpsk", "qpsk"],
                "n_values": [3, 9],
                "kinds": ["fresnel", "fourier"],
                "budget": 4**7,
            }
        )
        recs = run_papr_table(cfg)
        assert len(recs) == 8
        skipped = [r for r in recs if r.y_name == "overall_papr_skipped"]
        assert {(r.constellation, r.N) for r in skipped} == {("qpsk", 9)}
        assert all(math.isnan(r.y_value) for r in skipped)
        bpsk3 = [r for r in recs if r.constellation == "bpsk" and r.N == 3 and r.kind == "fresnel"][0]
        assert abs(bpsk3.y_value - 2.33) <= 0.01


class TestDiversityScan:
    def test_scan(self):
        cfg = from_mapping(
            {
                "experiment": "diversity-scan",
                "constellation": "bpsk",
                "schemes": [{"M": 8, "N": 1}, {"M": 2, "N": 4}],
                "channel": {"L": 1, "Q": 1},
                "trials": 3,
                "samples": 100,
            }
        )
        recs = run_experiment(cfg)
        vals = {(r.scheme, r.y_name): r.y_value for r in recs}
        assert vals[("SC(8,1)", "order_set_size")] == 2
        assert vals[("VOCDM(2,4)", "order_set_size")] == 6
        assert vals[("VOCDM(2,4)", "rho")] == 6
        for scheme in ("SC(8,1)", "VOCDM(2,4)"):
            assert vals[(scheme, "gd_estimate_min")] <= vals[(scheme, "order_set_size")]


class TestVerify:
    def test_all_pass(self):
        results = run_verify()
        assert all(r.passed for r in results), [r for r in results if not r.passed]
        assert all(r.residual >= 0 and r.tolerance >= 0 for r in results)

    def test_alpha_sign_error_is_caught(self, monkeypatch):
        good = fresnel.alpha
        monkeypatch.setattr(fresnel, "alpha", lambda q, n: good(-q, n))
        res = check_fresnel_commutation()
        assert not res.passed and res.residual > 1e-3


class TestCli:
    def test_verify_json(self, tmp_path, capsys):
        out = tmp_path / "v.json"
        assert cli.main(["verify", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["passed"] and all("residual" in c for c in report["checks"])

    def test_verify_failure_exit_code(self, monkeypatch, capsys):
        good = fresnel.alpha
        monkeypatch.setattr(fresnel, "alpha", lambda q, n: np.conj(good(q, n)))
        assert cli.main(["verify", "--format", "csv"]) != 0

    def test_ber_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "b.yaml"
        cfg.write_text(
            "experiment: ber\nschemes: [{M: 2, N: 2}]\nchannel: {L: 1, Q: 0}\nsnr_db: [6]\ntrials: 1000\nseed: 1\n"
        )
        assert cli.main(["ber", "--config", str(cfg), "--trials", "10", "--seed", "5", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert rows[0]["trials"] == 10 and rows[0]["seed"] == 5

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "b.yaml"
        cfg.write_text("experiment: ber\ntrials: 0\n")
        assert cli.main(["ber", "--config", str(cfg)]) == 2
        assert "trials" in capsys.readouterr().err

    def test_mismatched_subcommand(self, tmp_path, capsys):
        cfg = tmp_path / "b.yaml"
        cfg.write_text("experiment: papr-table\n")
        assert cli.main(["ber", "--config", str(cfg)]) == 2

    def test_missing_config_file(self, tmp_path, capsys):
        assert cli.main(["ber", "--config", str(tmp_path / "none.yaml")]) == 2

    def test_table_to_file(self, tmp_path):
        cfg = tmp_path / "t.yaml"
        cfg.write_text("experiment: papr-table\nconstellations: [bpsk]\nn_values: [3]\nkinds: [fresnel]\n")
        out = tmp_path / "t.csv"
        assert cli.main(["papr-table", "--config", str(cfg), "--out", str(out)]) == 0
        (rec,) = from_csv(out.read_text())
        assert rec.y_name == "overall_papr" and abs(rec.y_value - 2.33) <= 0.01
