import json

import pytest

from uod.cli import main


def run_json(tmp_path, argv):
    out = tmp_path / "report.json"
    code = main(argv + ["--out", str(out)])
    return code, out.read_bytes()


class TestVerifyCommands:
    def test_kubert_passes(self, tmp_path):
        code, payload = run_json(tmp_path, ["verify", "kubert", "--f", "3,4,5"])
        assert code == 0
        report = json.loads(payload)
        assert [c["verdict"] for c in report["checks"]] == ["PASS"] * 3
        assert all(c["route"] == "direct-tate" for c in report["checks"])

    def test_kubert_not_applicable_does_not_fail(self, tmp_path):
        code, payload = run_json(tmp_path, ["verify", "kubert", "--f", "6"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["verdict"] == "NOT_APPLICABLE"

    def test_yin(self, tmp_path):
        code, payload = run_json(tmp_path, ["verify", "yin", "--q", "3", "--f", "T"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["tables"]["expected"] == {
            "free_rank": 0,
            "torsion": [2],
        }

    def test_thm442(self, tmp_path):
        code, payload = run_json(tmp_path, ["verify", "thm442", "--f", "15"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["routes"] == ["kt-lhs", "direct-tate"]

    def test_basis_and_lemma(self, tmp_path):
        code, _ = run_json(tmp_path, ["verify", "basis", "--f", "12"])
        assert code == 0
        code, _ = run_json(tmp_path, ["verify", "lemma411", "--f", "12"])
        assert code == 0

    def test_uprime_and_ufunction(self, tmp_path):
        code, _ = run_json(tmp_path, ["verify", "uprime", "--f", "3,4"])
        assert code == 0
        code, payload = run_json(tmp_path, ["verify", "u-function", "--f", "3"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["tables"]["values"]["1"] == "1/2"


class TestOtherCommands:
    def test_structure(self, tmp_path):
        code, payload = run_json(tmp_path, ["structure", "--f", "8,12"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["tables"]["module"]["free_rank"] == 4

    def test_sign_homology_ff(self, tmp_path):
        code, payload = run_json(
            tmp_path,
            ["sign-homology", "--backend", "fq", "--q", "3", "--f", "T"],
        )
        assert code == 0
        report = json.loads(payload)
        table = report["checks"][0]["tables"]["sign_homology"]
        assert table["even"] == {"free_rank": 0, "torsion": [2]}

    def test_sk_compare(self, tmp_path):
        code, payload = run_json(tmp_path, ["sk", "compare", "--f", "3", "--level", "2"])
        assert code == 0
        report = json.loads(payload)
        levels = report["checks"][0]["tables"]["levels"]
        assert len(levels) == 2 and all(entry["agree"] for entry in levels)

    def test_ftate_grid(self, tmp_path):
        code, payload = run_json(tmp_path, ["ftate", "--grid", "2x2"])
        assert code == 0
        assert len(json.loads(payload)["checks"]) == 4

    def test_tower(self, tmp_path):
        code, payload = run_json(tmp_path, ["tower", "--f", "2", "--level", "2"])
        assert code == 0
        report = json.loads(payload)
        assert report["checks"][0]["tables"]["exception_flagged"] is True


class TestHarnessContract:
    def test_byte_identical_reruns(self, tmp_path):
        _, first = run_json(tmp_path, ["verify", "kubert", "--f", "3,4,5,15"])
        _, second = run_json(tmp_path, ["verify", "kubert", "--f", "3,4,5,15"])
        assert first == second

    def test_usage_error_exit_2(self, capsys):
        assert main(["sk", "compare", "--f", "not-a-number", "--level", "2"]) == 2
        assert main(["verify", "yin", "--f", "T"]) == 2  # missing --q
        assert main(["verify", "kubert"]) == 2  # missing --f

    def test_malformed_polynomial_exit_2(self):
        assert main(["verify", "yin", "--q", "3", "--f", "T^"]) == 2

    def test_nu_parsing(self, tmp_path):
        code, payload = run_json(
            tmp_path, ["structure", "--f", "4", "--nu", "2=-1"]
        )
        assert code == 0

    def test_every_check_carries_route(self, tmp_path):
        _, payload = run_json(tmp_path, ["verify", "thm442", "--f", "3"])
        report = json.loads(payload)
        for check in report["checks"]:
            assert "route" in check or "routes" in check

    def test_manifest_carries_parameters(self, tmp_path):
        _, payload = run_json(tmp_path, ["structure", "--f", "8", "--level", "2"])
        manifest = json.loads(payload)["manifest"]
        assert manifest["parameters"]["f"] == "8"
        assert manifest["parameters"]["level"] == 2
        assert manifest["version"]

    def test_csv_emission(self, tmp_path):
        csv_path = tmp_path / "checks.csv"
        code = main(["verify", "kubert", "--f", "3,5", "--csv", str(csv_path),
                     "--out", str(tmp_path / "r.json")])
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "name,params,routes,verdict,tables"
        assert len(lines) == 3 and lines[1].startswith("kubert,f=3,")

    def test_worker_pool_is_order_stable(self, tmp_path, monkeypatch):
        _, serial = run_json(tmp_path, ["verify", "kubert", "--f", "3,4,5,8,9"])
        monkeypatch.setenv("UOD_THREADS", "4")
        _, pooled = run_json(tmp_path, ["verify", "kubert", "--f", "3,4,5,8,9"])
        assert serial == pooled
