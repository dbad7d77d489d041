"""Smoke tests for the python bindings and the CLI."""

import json
import os
import subprocess
import tempfile
import unittest

import vsub


class ExteriorAlgebra(unittest.TestCase):
    def test_wedge_basis(self):
        a = {(1,): 1.0}
        b = {(2,): 1.0}
        self.assertEqual(vsub.wedge(3, 1, a, 1, b), {(1, 2): 1.0})
        self.assertEqual(vsub.wedge(3, 1, a, 1, a), {})

    def test_interior_is_adjoint_of_ext(self):
        xi = [0.3, -0.7, 0.2]
        alpha = {(1,): 1.25, (3,): -0.5}
        beta = {(1, 2): 0.75, (2, 3): 1.5}
        lhs = vsub.inner(3, 2, vsub.ext(3, 1, xi, alpha), beta)
        rhs = vsub.inner(3, 1, alpha, vsub.interior(3, 2, xi, beta))
        self.assertAlmostEqual(lhs, rhs, places=12)

    def test_pullback_rotation_preserves_area(self):
        import math

        phi = 0.41
        rot = [[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]]
        out = vsub.pullback(rot, 2, 2, {(1, 2): 1.0})
        self.assertAlmostEqual(out[(1, 2)], 1.0, places=13)


class Orbifold(unittest.TestCase):
    def test_bezout(self):
        self.assertEqual(vsub.bezout(2, 3), (2, 1))
        self.assertEqual(vsub.bezout(1, 1), (1, 0))

    def test_fixed_point_codim(self):
        mats = vsub.cyclic_action_matrices(3, [1, 0], 4)
        self.assertEqual(len(mats), 3)
        data = vsub.fixed_point_data(mats[1])
        self.assertEqual(data["codim"], 2)
        self.assertEqual(data["element-order"], 3)


class Catalog(unittest.TestCase):
    def test_contains_the_hopf_entry(self):
        names = {e["name"]: e for e in vsub.catalog()}
        self.assertIn("hopf1-nu2", names)
        entry = names["hopf1-nu2"]
        self.assertEqual(entry["lambda"], 0.0)
        self.assertEqual(entry["mu"], 4.0)
        for e in vsub.catalog():
            self.assertGreaterEqual(e["mu"], e["lambda"])

    def test_eigen_residual_small(self):
        rep = vsub.eigen_residual("hopf-1", "nu2", 4.0, samples=5, seed=1)
        self.assertLess(rep["max-residual"], 1e-8)

    def test_theta_omega_on_a_sample(self):
        z = vsub.sample_points("hopf-1", 1, 7)[0]
        t = vsub.theta_omega("hopf-1", z)
        self.assertLess(t["theta-norm"], 1e-9)
        self.assertGreater(t["omega-norm"], 1.0)


class Scenarios(unittest.TestCase):
    def test_run_and_determinism(self):
        scenario = {
            "model": "warped-torus",
            "check": "theta-omega",
            "potential": True,
            "tolerance": 1e-8,
            "samples": 6,
            "seed": 11,
        }
        a = vsub.run_scenario(scenario)
        b = vsub.run_scenario(scenario)
        self.assertTrue(a["pass"])
        self.assertEqual(a["residuals"], b["residuals"])

    def test_expected_failure(self):
        rep = vsub.run_scenario(
            {
                "model": "hopf-1",
                "check": "intertwining",
                "identity": "commutation",
                "degree": 1,
                "forms": 2,
                "tolerance": 1e-3,
                "samples": 10,
                "seed": 3,
                "expect": "fail",
            }
        )
        self.assertEqual(rep["outcome"], "expected-failure")
        self.assertEqual(rep["exit-code"], 0)
        self.assertGreater(rep["max-residual"], 1e-3)


class Cli(unittest.TestCase):
    def setUp(self):
        self.binary = os.environ.get("VSUB_VERIFY_BIN")
        if not self.binary or not os.path.exists(self.binary):
            self.skipTest("verify binary not available")

    def run_cli(self, *args):
        return subprocess.run([self.binary, *args], capture_output=True, text=True)

    def test_exit_codes(self):
        src = os.environ.get("VSUB_SOURCE_DIR", ".")
        ok = self.run_cli(
            "--scenario", os.path.join(src, "scenarios", "flat-torus-intertwining.json"),
            "--samples", "10",
        )
        self.assertEqual(ok.returncode, 0, ok.stdout + ok.stderr)

        missing = self.run_cli("--scenario", "/nonexistent/path.json")
        self.assertEqual(missing.returncode, 2)

        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump({"model": "no-such-model", "check": "theta-omega"}, f)
            bad = f.name
        try:
            conf = self.run_cli("--scenario", bad)
            self.assertEqual(conf.returncode, 2)
        finally:
            os.unlink(bad)

        # tolerance failure exits 1
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(
                {
                    "model": "warped-torus",
                    "check": "theta-omega",
                    "expect-theta-zero": True,
                    "tolerance": 1e-8,
                    "samples": 5,
                    "seed": 2,
                },
                f,
            )
            failing = f.name
        try:
            res = self.run_cli("--scenario", failing)
            self.assertEqual(res.returncode, 1)
        finally:
            os.unlink(failing)

    def test_list_catalog(self):
        res = self.run_cli("--list-catalog")
        self.assertEqual(res.returncode, 0)
        entries = json.loads(res.stdout)
        self.assertTrue(any(e["name"] == "hopf1-nu2" for e in entries))

    def test_report_file_round_trip(self):
        src = os.environ.get("VSUB_SOURCE_DIR", ".")
        with tempfile.TemporaryDirectory() as d:
            report = os.path.join(d, "report.json")
            res = self.run_cli(
                "--scenario", os.path.join(src, "scenarios", "hopf-eigenvalue-shift.json"),
                "--samples", "10", "--report", report,
            )
            self.assertEqual(res.returncode, 0)
            with open(report) as f:
                rep = json.load(f)
            self.assertTrue(rep["pass"])
            self.assertEqual(len(rep["residuals"]), 10)


if __name__ == "__main__":
    unittest.main()
