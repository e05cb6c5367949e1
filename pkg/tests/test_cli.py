import json
import math

import numpy as np
import pytest

from mcert.cli import main
from mcert.symbols import write_matrix_csv


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


class TestCertifyHm:
    def test_constant_symbol_passes(self, tmp_path):
        out = tmp_path / "hm1.json"
        rc = main(["certify-hm", "--symbol", "radial-power:exponent=0", "--n", "3",
                   "--order", "2", "--out", str(out)])
        assert rc == 0
        rep = load_report(out)
        rec = {r["name"]: r for r in rep["records"]}
        assert rec["hm-constant"]["measured"] == pytest.approx(1.0, abs=1e-9)
        assert rec["hm-constant"]["verdict"] == "PASS"

    def test_growing_symbol_fails_order_zero(self):
        rc = main(["certify-hm", "--symbol", "radial-power:exponent=-1", "--n", "3",
                   "--order", "1"])
        assert rc == 1

    def test_decaying_profile_fit(self, tmp_path):
        out = tmp_path / "hm5.json"
        rc = main(["certify-hm", "--symbol", "radial-power:exponent=5", "--n", "3",
                   "--order", "1", "--out", str(out)])
        assert rc == 0
        rep = load_report(out)
        rec = {r["name"]: r for r in rep["records"]}
        fitted = rec["hm-order-0"]["details"]["fitted_decay_exponent"]
        assert abs(fitted - 5.0) <= 0.5  # sigma_3 + 1 = 5 within 10%


class TestRigidity:
    def test_constant_profile_passes(self, tmp_path):
        out = tmp_path / "rc.json"
        rc = main(["rigidity", "--profile", "radial-power:exponent=0", "--n", "5",
                   "--p", "10", "--out", str(out)])
        assert rc == 0

    def test_rank_gap_exit_codes(self, tmp_path):
        rc3 = main(["rigidity", "--profile", "radial-power:exponent=5", "--n", "3",
                    "--p", "10", "--out", str(tmp_path / "r3.json")])
        rc16 = main(["rigidity", "--profile", "radial-power:exponent=5", "--n", "16",
                     "--p", "100", "--out", str(tmp_path / "r16.json")])
        assert (rc3, rc16) == (0, 1)
        rep16 = load_report(tmp_path / "r16.json")
        failed = {r["name"] for r in rep16["records"] if r["verdict"] == "FAIL"}
        assert "decay-c0" in failed
        exps = rep16["tables"]["exponents"][0]
        assert exps["c0"] == pytest.approx(16.0 / 3.0)

    def test_oscillating_profile_fails_limit(self, tmp_path):
        # sin(x) has no limit at infinity: the built-in families cannot
        # express it, so drive the records directly
        from mcert.schur import profile_rigidity_records
        from mcert.symbols import RadialProfile

        prof = RadialProfile(lambda x: np.sin(np.asarray(x, dtype=float)), name="sin")
        records, _ = profile_rigidity_records(prof, 5, 10.0)
        limit = [r for r in records if r.name == "limit-existence"][0]
        assert limit.verdict == "FAIL"

    def test_p_out_of_range_is_input_error(self):
        rc = main(["rigidity", "--profile", "radial-power:exponent=2", "--n", "3",
                   "--p", "3"])
        assert rc == 2

    def test_sections_mode(self, tmp_path):
        out = tmp_path / "sec.json"
        rc = main(["rigidity", "--profile", "radial-power:exponent=0", "--n", "5",
                   "--p", "10", "--sections", "2", "--out", str(out)])
        assert rc == 0
        rep = load_report(out)
        assert "section_lower_bounds" in rep["tables"]
        assert rep["tables"]["classification"][0]["classification"] == "CONSISTENT"


class TestSphereSpectrum:
    def test_table_matches_recurrence(self, tmp_path):
        out = tmp_path / "spec.json"
        rc = main(["sphere-spectrum", "--n", "3", "--p", "4", "--x", "0.5",
                   "--kmax", "10", "--out", str(out), "--format", "csv"])
        assert rc == 0
        rep = load_report(out)
        rows = rep["tables"]["spectrum"]
        assert rows[1]["phi(x=0.5)"] == pytest.approx(0.5)
        assert rows[2]["phi(x=0.5)"] == pytest.approx(-0.125)
        assert [r["m_k"] for r in rows] == [2 * k + 1 for k in range(11)]
        csv_path = tmp_path / "spec_spectrum.csv"
        assert csv_path.exists()
        header = csv_path.read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("k,m_k")


class TestSchurBound:
    def test_all_ones_matrix(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix_csv(np.ones((6, 6)), path)
        out = tmp_path / "sb.json"
        rc = main(["schur-bound", "--points", str(path), "--p", "2", "--out", str(out)])
        assert rc == 0
        rep = load_report(out)
        assert rep["tables"]["bound"][0]["lower_bound"] == pytest.approx(1.0, abs=1e-8)

    def test_missing_file_exit_code(self):
        rc = main(["schur-bound", "--points", "/nonexistent/m.csv", "--p", "2"])
        assert rc == 2


class TestGeometryCommand:
    def test_slope_record(self, tmp_path):
        out = tmp_path / "geo.json"
        rc = main(["geometry", "--n", "2", "--R"] + [str(v) for v in range(2, 11)]
                  + ["--out", str(out)])
        assert rc == 0
        rep = load_report(out)
        rec = [r for r in rep["records"] if r["name"] == "volume-growth-rate"][0]
        assert rec["measured"] == pytest.approx(2.0, rel=0.05)

    def test_bad_radius_is_input_error(self):
        rc = main(["geometry", "--n", "2", "--R", "-1"])
        assert rc == 2


class TestReportDeterminism:
    def strip_header(self, path):
        rep = load_report(path)
        rep.pop("header")
        return json.dumps(rep, sort_keys=True)

    def test_identical_seeds_identical_reports(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["rigidity", "--profile", "radial-power:exponent=5", "--n", "5",
                "--p", "10", "--sections", "2", "--seed", "42"]
        rc_a = main(args + ["--out", str(a)])
        rc_b = main(args + ["--out", str(b)])
        assert rc_a == rc_b
        assert self.strip_header(a) == self.strip_header(b)

    def test_schema_marker(self, tmp_path):
        out = tmp_path / "r.json"
        main(["geometry", "--n", "2", "--R", "2", "3", "4", "--out", str(out)])
        rep = load_report(out)
        assert rep["schema"] == "mcert/1"
        assert "timestamp" in rep["header"]


class TestAccuracyExitCode:
    def test_underpowered_monte_carlo_exits_three(self):
        rc = main(["geometry", "--n", "5", "--R", "6", "--mc-samples", "200"])
        assert rc == 3
