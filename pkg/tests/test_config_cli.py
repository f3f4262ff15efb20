import json
from pathlib import Path

import numpy as np
import pytest

from dimerdark.cli import COLUMNS, main, read_csv_body, run
from dimerdark.config import load_config, parse_config
from dimerdark.dynamics import gibbs_populations
from dimerdark.errors import ConfigError
from helpers import DEFAULT_BATH

ROOT = Path(__file__).resolve().parents[1]

MINIMAL = """
command: spectrum
dimer:
  monomer1: {energy: 2.5}
  monomer2: {energy: 2.8}
"""


def test_minimal_config_defaults():
    rc = parse_config(MINIMAL)
    assert rc.raw["bath"] == {"temperature": 300.0, "cutoff_energy": 10.0, "refractive_index": 1.0,
                              "coupling_constant": None}
    assert rc.threshold == 1e-6
    assert rc.master_seed == 0
    assert rc.bath().coupling == pytest.approx(DEFAULT_BATH.coupling)
    text = rc.to_yaml()
    assert "temperature: 300.0" in text and "threshold: 1.0e-06" in text


@pytest.mark.parametrize(
    "text, key",
    [
        (MINIMAL + "bath: {temperature: -1}\n", "bath.temperature"),
        (MINIMAL + "colour: red\n", "colour"),
        (MINIMAL.replace("energy: 2.5", "energy: -2.5"), "dimer.monomer1.energy"),
        (MINIMAL.replace("{energy: 2.5}", "{energy: 2.5, mu: [1, 2]}"), "dimer.monomer1.mu"),
        ("command: evolve\n", "dimer"),
        ("command: launch\n", "command"),
        (MINIMAL + "ensemble: {samples: 5}\n", "ensemble"),
        ("command: ensemble\nensemble: {samples: 0}\n", "ensemble.samples"),
        ("command: scan-dark\nscan-dark: {q01: {min: 1, max: 0, steps: 4}}\n", "scan-dark.q01.max"),
        ("command: ensemble\nmaster_seed: -3\n", "master_seed"),
    ],
)
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert key in str(info.value)


@pytest.mark.parametrize("name", ["fig3", "fig4_scan", "fig5_ensemble", "polaron"])
def test_shipped_configs_round_trip(name):
    rc = load_config(ROOT / "configs" / f"{name}.yaml")
    again = parse_config(rc.to_yaml())
    assert again.raw == rc.raw
    assert again.to_yaml() == rc.to_yaml()


def _run(tmp_path, text, *extra):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(text)
    out = tmp_path / "out"
    code = main(["--config", str(cfg), "--out", str(out), *extra])
    return code, out


def test_spectrum_uncoupled_echoes_site_energies(tmp_path):
    code, out = _run(tmp_path, MINIMAL)
    assert code == 0
    cols, data = read_csv_body(out / "spectrum.csv")
    assert tuple(cols) == COLUMNS["spectrum"]
    assert np.array_equal(data[:, 1], [0.0, 2.5, 2.8])
    head = (out / "spectrum.csv").read_text().splitlines()[:3]
    assert head[0].startswith("# dimerdark ") and head[1] == "# master_seed: 0"


def test_evolve_fig3_reaches_gibbs(tmp_path):
    rc = load_config(ROOT / "configs" / "fig3.yaml")
    path = run(rc, tmp_path)
    cols, data = read_csv_body(path)
    assert tuple(cols) == ("time_s", "pop0", "pop1", "pop2")
    assert np.allclose(data[-1, 1:], gibbs_populations([0, 2.5, 2.8], rc.bath()), atol=1e-6)
    assert data[-1, 0] == pytest.approx(10.0)


def test_ensemble_bodies_identical_across_runs_and_threads(tmp_path):
    text = (ROOT / "configs" / "fig5_ensemble.yaml").read_text()
    text = text.replace("samples: 1000", "samples: 40").replace("steps: 31", "steps: 4")
    bodies = []
    for i, threads in enumerate(("1", "1", "3")):
        sub = tmp_path / str(i)
        sub.mkdir()
        code, out = _run(sub, text, "--seed", "77", "--threads", threads)
        assert code == 0
        lines = (out / "ensemble.csv").read_text().splitlines()
        assert "# master_seed: 77" in lines
        bodies.append([ln for ln in lines if not ln.startswith("#")])
    assert bodies[0] == bodies[1] == bodies[2]
    assert bodies[0][0].split(",")[:9] == list(COLUMNS["ensemble"][:9])


def test_scan_rows_match_cells(tmp_path):
    text = "command: scan-dark\nscan-dark: {q01: {min: -0.1, max: 0.1, steps: 4}, delta: {min: 0, max: 100, steps: 3}}\n"
    code, out = _run(tmp_path, text)
    assert code == 0
    _, data = read_csv_body(out / "scan_dark.csv")
    assert data.shape == (3 * 4 * 3, len(COLUMNS["scan-dark"]))


def test_polaron_and_rates_commands(tmp_path):
    code, out = _run(tmp_path, (ROOT / "configs" / "polaron.yaml").read_text(), "--lambda-override", "1e-7")
    assert code == 0
    cols, data = read_csv_body(out / "polaron.csv")
    assert np.all(data[:, cols.index("lambda_eV")] == 1e-7)
    assert data[0, cols.index("corrected_rate_eV")] == 0.0
    text = (ROOT / "configs" / "fig3.yaml").read_text().replace("command: evolve", "command: rates")
    text = text.split("evolve:")[0]
    code, out = _run(tmp_path, text)
    assert code == 0
    _, data = read_csv_body(out / "rates.csv")
    assert data.shape == (6, 6)


def test_exit_codes_and_error_json(tmp_path, capsys):
    code, _ = _run(tmp_path, MINIMAL + "bath: {temperature: -5}\n")
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "config" and err["key"] == "bath.temperature"
    degenerate = MINIMAL.replace("2.8", "2.5").replace("command: spectrum", "command: rates")
    code, _ = _run(tmp_path, degenerate)
    assert code == 4
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "degeneracy" and err["pair"] == [1, 2]
    code, _ = _run(tmp_path, MINIMAL, "--seed", "-1")
    assert code == 2


def test_numeric_error_exit_code(tmp_path, capsys, monkeypatch):
    from dimerdark import cli
    from dimerdark.errors import NumericalError

    def boom(rc):
        raise NumericalError("quadrature did not converge")

    monkeypatch.setitem(cli.DISPATCH, "spectrum", boom)
    code, _ = _run(tmp_path, MINIMAL)
    assert code == 3
    assert json.loads(capsys.readouterr().err.strip())["error"] == "numeric"


def test_plot_flag_writes_png(tmp_path):
    pytest.importorskip("matplotlib")
    text = (ROOT / "configs" / "fig3.yaml").read_text().replace("points: 200", "points: 20")
    code, out = _run(tmp_path, text, "--plot")
    assert code == 0
    assert (out / "evolve.png").stat().st_size > 0
