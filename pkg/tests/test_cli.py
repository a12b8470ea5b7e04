import io
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from fpdsynth.cli import main
from fpdsynth.touchstone import read_touchstone


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def plan(tmp_path):
    path = tmp_path / "plan.json"
    code, _ = run("synth", "--f0", "2.6e9", "--fbw", "0.03", "--ratios", "1,2,4", "--out", path)
    assert code == 0
    return path


class TestSynth:
    def test_reference(self, tmp_path):
        code, text = run(
            "synth", "--f0", "2.6e9", "--fbw", "0.03", "--ripple", "0.04321", "--ratios", "1,2,4",
            "--out", tmp_path / "p.json",
        )
        assert code == 0
        assert "Qe = 28.3867" in text
        assert "g-values: g0=1.0000 g1=0.8516 g2=1.1032 g3=0.8516 g4=1.0000" in text
        assert "M_branch = 0.0310" in text
        for line in ("M1 = 0.0117", "M2 = 0.0165", "M3 = 0.0234"):
            assert line in text

    def test_double_bandwidth(self, tmp_path):
        code, text = run("synth", "--f0", "2.6e9", "--fbw", "0.06", "--ratios", "1,2,4", "--out", tmp_path / "p.json")
        assert code == 0 and "Qe = 14.1933" in text

    def test_exact_g(self, tmp_path):
        code, text = run("synth", "--f0", "2.6e9", "--fbw", "0.03", "--ratios", "1,2,4", "--exact-g",
                         "--out", tmp_path / "p.json")
        assert code == 0 and "Qe = 28.3861" in text

    def test_return_loss_flag(self, tmp_path):
        code, text = run("synth", "--f0", "2.6e9", "--fbw", "0.03", "--rl", "20", "--ratios", "1,1",
                         "--out", tmp_path / "p.json")
        assert code == 0 and "ripple = 0.0436 dB" in text

    @pytest.mark.parametrize(
        "extra",
        [
            ["--ratios", "1,2,-4"],
            ["--ratios", "1,x"],
            ["--ratios", "1,2,4", "--ripple", "0.1", "--rl", "20"],
            ["--ratios", "1,2,4", "--fbw", "-0.03"],
        ],
    )
    def test_usage_errors(self, extra, tmp_path, capsys):
        argv = ["synth", "--f0", "2.6e9", "--fbw", "0.03", "--out", tmp_path / "p.json"] + extra
        with pytest.raises(SystemExit) as ei:
            run(*argv)
        assert ei.value.code == 2

    @pytest.mark.parametrize(
        "extra",
        [
            ["--fbw", "0.03", "--ratios", "4"],
            ["--fbw", "1.5", "--ratios", "1,2"],
            ["--fbw", "0.03", "--ratios", "1,2", "--order", "4"],
        ],
    )
    def test_infeasible_spec(self, extra, tmp_path):
        code, _ = run("synth", "--f0", "2.6e9", "--out", tmp_path / "p.json", *extra)
        assert code == 2
        assert not (tmp_path / "p.json").exists()


class TestSim:
    def test_default_sweep(self, plan):
        code, text = run("sim", "--plan", plan)
        assert code == 0
        sw = read_touchstone(plan.with_suffix(".s4p"))
        assert sw.freqs.size == 1601
        k = np.argmin(np.abs(sw.freqs - 2.6e9))
        assert abs(sw.S[k, 3, 0]) == pytest.approx(0.7559, abs=5e-4)
        assert 20 * np.log10(abs(sw.S[k, 3, 0])) == pytest.approx(-2.430, abs=0.01)

    def test_single_point(self, plan, tmp_path):
        ts = tmp_path / "one.s4p"
        code, _ = run("sim", "--plan", plan, "--points", "1", "--touchstone", ts)
        assert code == 0
        body = [l for l in ts.read_text().splitlines() if not l.startswith(("!", "#"))]
        assert len(body) == 4  # one record, wrapped
        sw = read_touchstone(ts)
        assert abs(sw.S[0, 0, 0]) < 1e-6

    def test_csv(self, plan, tmp_path):
        code, _ = run("sim", "--plan", plan, "--csv", tmp_path / "s.csv", "--points", "11")
        assert code == 0
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0].startswith("freq_hz,S11_db,S21_db,")
        assert len(lines) == 12

    def test_lossy(self, plan, tmp_path):
        code, _ = run("sim", "--plan", plan, "--qu", "500", "--touchstone", tmp_path / "l.s4p", "--points", "5")
        assert code == 0
        S = read_touchstone(tmp_path / "l.s4p").S
        assert np.all((np.abs(S[:, :, 0]) ** 2).sum(axis=1) < 1)

    def test_qu_zero(self, plan):
        assert run("sim", "--plan", plan, "--qu", "0")[0] == 2

    def test_missing_plan(self, tmp_path):
        assert run("sim", "--plan", tmp_path / "nope.json")[0] == 4

    def test_malformed_plan(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"schema": "fpdsynth-plan/1"}')
        assert run("sim", "--plan", p)[0] == 4
        assert "'spec'" in capsys.readouterr().err

    def test_bad_sweep(self, plan):
        assert run("sim", "--plan", plan, "--start", "3e9", "--stop", "2e9")[0] == 2


class TestReport:
    def test_reference_passes(self, plan, tmp_path):
        ts = tmp_path / "fpd.s4p"
        run("sim", "--plan", plan, "--touchstone", ts, "--start", "2.4e9", "--stop", "2.8e9")
        code, text = run("report", "--touchstone", ts, "--f0", "2.6e9", "--fbw", "0.03", "--ratios", "1,2,4")
        assert code == 0
        for key in ("S23", "S24", "S34"):
            assert key in text

    def test_detuned_fails(self, plan, tmp_path, capsys):
        import json

        d = json.loads(plan.read_text())
        d["network"]["couplings"][0][2] *= 2
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(d))
        ts = tmp_path / "bad.s4p"
        run("sim", "--plan", bad, "--touchstone", ts, "--start", "2.4e9", "--stop", "2.8e9")
        code, text = run("report", "--touchstone", ts, "--f0", "2.6e9", "--fbw", "0.03", "--ratios", "1,2,4")
        assert code == 3
        assert "FAIL" in text and "division_ratio" in text

    def test_band_outside_data(self, plan, tmp_path):
        ts = tmp_path / "n.s4p"
        run("sim", "--plan", plan, "--touchstone", ts, "--start", "2.59e9", "--stop", "2.61e9", "--points", "11")
        assert run("report", "--touchstone", ts, "--f0", "2.6e9", "--fbw", "0.03")[0] == 2


class TestNetlistAndMna:
    def test_netlist_then_mna(self, plan, tmp_path):
        ckt = tmp_path / "fpd.ckt"
        assert run("netlist", "--plan", plan, "--out", ckt)[0] == 0
        ts_mna, ts_cm = tmp_path / "m.s4p", tmp_path / "c.s4p"
        sweep = ["--start", "2.561e9", "--stop", "2.639e9", "--points", "81"]
        assert run("mna", "--netlist", ckt, "--touchstone", ts_mna, *sweep)[0] == 0
        assert run("sim", "--plan", plan, "--touchstone", ts_cm, *sweep)[0] == 0
        a, b = read_touchstone(ts_mna).S, read_touchstone(ts_cm).S
        assert np.abs(a - b).max() <= 1e-8

    def test_netlist_to_stdout(self, plan):
        code, text = run("netlist", "--plan", plan)
        assert code == 0 and "P4" in text and text.startswith("*")

    def test_mna_needs_range(self, tmp_path):
        ckt = tmp_path / "r.ckt"
        ckt.write_text("P1 1 0 50\nR1 1 2 50\nP2 2 0 50\n")
        assert run("mna", "--netlist", ckt)[0] == 2

    def test_mna_series_resistor(self, tmp_path):
        ckt = tmp_path / "r.ckt"
        ckt.write_text("P1 1 0 50\nR1 1 2 50\nP2 2 0 50\n")
        assert run("mna", "--netlist", ckt, "--start", "1e9", "--points", "1")[0] == 0
        sw = read_touchstone(tmp_path / "r.s2p")
        assert sw.S[0, 1, 0] == pytest.approx(2 / 3, abs=1e-9)

    def test_bad_netlist(self, tmp_path, capsys):
        ckt = tmp_path / "bad.ckt"
        ckt.write_text("P1 1 0 50\nK1 L1 L9 0.5\n")
        assert run("mna", "--netlist", ckt, "--start", "1e9", "--stop", "2e9")[0] == 4
        assert "line 2" in capsys.readouterr().err

    def test_singular(self, tmp_path):
        ckt = tmp_path / "s.ckt"
        ckt.write_text("L1 1 0 1n\nL2 2 3 1n\nK1 L1 L2 0.5\nR1 2 3 50\nP1 1 0 50\n")
        assert run("mna", "--netlist", ckt, "--start", "1e9", "--stop", "2e9")[0] == 2

    def test_lumped_divider_demo(self, tmp_path):
        ckt = tmp_path / "divider_lumped.ckt"
        ckt.write_text(resources.files("fpdsynth").joinpath("data/divider_lumped.ckt").read_text())
        assert run("mna", "--netlist", ckt, "--start", "2.4e9", "--stop", "2.8e9", "--points", "21")[0] == 0


class TestExtract:
    def _write(self, net, freqs, path):
        from fpdsynth.engine import sparameters
        from fpdsynth.touchstone import write_touchstone

        return write_touchstone(sparameters(net, freqs), path)

    def test_qe(self, tmp_path):
        from fpdsynth.extraction import one_resonator_network

        f = np.linspace(2.6e9 * (1 - 4 / 28.387), 2.6e9 * (1 + 4 / 28.387), 2001)
        ts = self._write(one_resonator_network(28.387, 2.6e9), f, tmp_path / "q.s1p")
        code, text = run("extract", "qe", "--touchstone", ts)
        assert code == 0
        qe = float(text.split("Qe = ")[1].split()[0])
        assert qe == pytest.approx(28.387, rel=0.02)

    def test_k(self, tmp_path):
        from fpdsynth.extraction import two_resonator_network

        f = np.linspace(2.6e9 * 0.9, 2.6e9 * 1.1, 2001)
        ts = self._write(two_resonator_network(0.031, 2.6e9), f, tmp_path / "k.s2p")
        code, text = run("extract", "k", "--touchstone", ts)
        assert code == 0 and "k = 0.03" in text

    def test_failure_is_usage(self, tmp_path):
        from fpdsynth.extraction import one_resonator_network

        ts = self._write(one_resonator_network(30.0, 2.6e9), np.linspace(1e9, 1.2e9, 101), tmp_path / "f.s1p")
        assert run("extract", "qe", "--touchstone", ts)[0] == 2


class TestTune:
    def test_converges(self, plan, tmp_path):
        code, text = run("tune", "--plan", plan, "--out", tmp_path / "t.json")
        assert code == 0 and "in 1 evaluations" in text

    def test_unreachable(self, plan, tmp_path):
        out = tmp_path / "t.json"
        code, _ = run("tune", "--plan", plan, "--rl-min", "60", "--max-evals", "20", "--out", out)
        assert code == 3
        assert out.exists()


class TestUstrip:
    def test_fifty_ohm(self):
        code, text = run("ustrip", "--z0", "50")
        assert code == 0
        assert "w = 1.1257 mm" in text
        half = float(text.split("half wavelength = ")[1].split()[0])
        assert 20 <= half <= 25

    def test_analyse_width(self):
        code, text = run("ustrip", "--w", "1.1257e-3")
        assert code == 0
        assert float(text.split("z0 = ")[1].split()[0]) == pytest.approx(50.0, abs=0.01)

    def test_out_of_range(self):
        assert run("ustrip", "--z0", "500")[0] == 2

    def test_bad_substrate(self):
        assert run("ustrip", "--er", "0.5")[0] == 2


class TestDeterminism:
    def _pipeline(self, d):
        d.mkdir()
        run("synth", "--f0", "2.6e9", "--fbw", "0.03", "--ratios", "1,2,4", "--out", d / "plan.json")
        run("sim", "--plan", d / "plan.json", "--touchstone", d / "s.s4p", "--csv", d / "s.csv", "--points", "201")
        run("netlist", "--plan", d / "plan.json", "--out", d / "n.ckt")
        run("mna", "--netlist", d / "n.ckt", "--touchstone", d / "m.s4p", "--start", "2.5e9", "--stop", "2.7e9")
        _, rep = run("report", "--touchstone", d / "s.s4p", "--f0", "2.6e9", "--fbw", "0.03")
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}, rep

    def test_byte_identical(self, tmp_path):
        a, ra = self._pipeline(tmp_path / "a")
        b, rb = self._pipeline(tmp_path / "b")
        assert a == b and ra == rb


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "fpdsynth", "ustrip", "--z0", "50"], capture_output=True, text=True, cwd=tmp_path
    )
    assert r.returncode == 0 and "eeff = 7.1245" in r.stdout


def test_no_command():
    with pytest.raises(SystemExit) as ei:
        run()
    assert ei.value.code == 2
