import json

import numpy as np
import pytest

from conftest import GAUSSIAN_EIGENVALUES, GAUSSIAN_GAP
from zigzagspec.cli import RunConfig, main, parse_complex, parse_config_text

# a tight region holding just the stationary eigenvalue and the gap pair
# keeps every CLI invocation fast
REGION = ("--re-min", "-0.9", "--re-max", "0.1", "--im-max", "1.6")


def run(args, capsys):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------- helpers


def test_parse_complex_accepts_both_imaginary_suffixes():
    assert parse_complex("0.5+1.5i") == 0.5 + 1.5j
    assert parse_complex("0.5+1.5j") == 0.5 + 1.5j
    assert parse_complex("-0.4 + 1.0i") == -0.4 + 1.0j
    assert parse_complex("2") == 2.0 + 0.0j
    with pytest.raises(Exception):
        parse_complex("not-a-number")


def test_config_round_trip():
    cfg = RunConfig(potential="gaussian:1", im_max=1.6, seed=3, out="a.json")
    parsed = parse_config_text(cfg.to_text())
    assert parsed["potential"] == "gaussian:1"
    assert parsed["im-max"] == "1.6"
    assert parsed["seed"] == "3"
    assert parsed["out"] == "a.json"


def test_config_text_rejects_unknown_keys():
    from zigzagspec.errors import DomainError

    with pytest.raises(DomainError):
        parse_config_text("wavelength = 7\n")


# ---------------------------------------------------------------- spectrum


def test_spectrum_json_payload(tmp_path, capsys):
    out = tmp_path / "spec.json"
    code, _, _ = run(
        ["spectrum", "--potential", "gaussian:1", *REGION, "--out", str(out)], capsys
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["potential"] == "gaussian:1"
    assert payload["gap"] == pytest.approx(GAUSSIAN_GAP, abs=1e-9)
    eigs = payload["eigenvalues"]
    assert len(eigs) == 3  # 0 and the conjugate gap pair
    for e in eigs:
        assert set(e) == {"re", "im", "branch", "multiplicity", "residual"}
    assert payload["config"]["potential"] == "gaussian:1"
    assert "diagnostics" in payload


def test_spectrum_artifacts_are_reproducible(tmp_path, capsys):
    out, csv, svg = (tmp_path / n for n in ("s.json", "s.csv", "s.svg"))
    args = [
        "spectrum",
        "--potential",
        "gaussian:1",
        *REGION,
        "--out",
        str(out),
        "--csv",
        str(csv),
        "--plot",
        str(svg),
    ]
    assert run(args, capsys)[0] == 0
    first = [p.read_bytes() for p in (out, csv, svg)]
    assert run(args, capsys)[0] == 0
    second = [p.read_bytes() for p in (out, csv, svg)]
    assert first == second  # byte-identical reruns, no timestamps anywhere

    header, *rows = csv.read_text().strip().splitlines()
    assert header == "re,im,branch,multiplicity"
    assert len(rows) == 3

    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert 'width="640"' in text and 'height="480"' in text
    assert "#1f4fbf" in text and "#bf1f1f" in text  # both symmetry branches


def test_spectrum_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# tight window\npotential = gaussian:1\nre-min = -0.9\nre-max = 0.1\n"
        "im-max = 0.5\n"
    )
    out = tmp_path / "o.json"
    code, _, _ = run(
        [
            "spectrum",
            "--config",
            str(cfgfile),
            "--im-max",
            "1.6",  # beats the file value
            "--out",
            str(out),
        ],
        capsys,
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["im_max"] == 1.6
    assert payload["gap"] == pytest.approx(GAUSSIAN_GAP, abs=1e-9)


def test_spectrum_sigma_rescaling(tmp_path, capsys):
    out = tmp_path / "o.json"
    code, _, _ = run(
        [
            "spectrum",
            "--potential",
            "gaussian:1",
            "--sigma",
            "2",
            *REGION,
            "--out",
            str(out),
        ],
        capsys,
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["gap"] == pytest.approx(GAUSSIAN_GAP / 2.0, abs=1e-9)
    assert "gamma / 2" in payload["potential"]


def test_spectrum_stdout_when_no_out(capsys):
    code, outtext, _ = run(["spectrum", "--potential", "gaussian:1", *REGION], capsys)
    assert code == 0
    assert json.loads(outtext)["gap"] == pytest.approx(GAUSSIAN_GAP, abs=1e-9)


# ----------------------------------------------------------------- perturb


def test_perturb_payload_and_arrows(tmp_path, capsys):
    out, svg = tmp_path / "p.json", tmp_path / "p.svg"
    code, _, _ = run(
        [
            "perturb",
            "--potential",
            "gaussian:1",
            "--eps",
            "0.5",
            *REGION,
            "--out",
            str(out),
            "--plot",
            str(svg),
        ],
        capsys,
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["epsilon"] == 0.5
    assert payload["perturbed_gap"] >= payload["gap"] - 1e-9
    entries = payload["perturbation"]
    assert all(e["resolved"] for e in entries)
    zero = min(entries, key=lambda e: abs(complex(e["gamma"]["re"], e["gamma"]["im"])))
    assert zero["shifted"] == {"re": 0.0, "im": 0.0}
    assert abs(zero["coefficient"]["re"]) < 1e-10
    assert "polygon" in svg.read_text()  # arrowheads drawn


def test_perturb_rejects_sigma(tmp_path, capsys):
    # as a flag: the perturb subcommand does not define --sigma at all
    code, _, err = run(
        ["perturb", "--potential", "gaussian:1", "--eps", "0.1", "--sigma", "2"],
        capsys,
    )
    assert code == 1
    assert "unrecognized" in err
    # through a config file: caught by the explicit guard
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("potential = gaussian:1\neps = 0.1\nsigma = 2\n")
    code, _, err = run(["perturb", "--config", str(cfgfile)], capsys)
    assert code == 1
    assert "scaled descriptor" in err


def test_perturb_requires_eps(capsys):
    code, _, err = run(["perturb", "--potential", "gaussian:1", *REGION], capsys)
    assert code == 1
    assert "eps" in err


# ------------------------------------------------------------------ eigfun


def test_eigfun_polishes_and_tabulates(tmp_path, capsys):
    csv, out = tmp_path / "f.csv", tmp_path / "f.json"
    code, _, _ = run(
        [
            "eigfun",
            "--potential",
            "gaussian:1",
            "--gamma",
            "-0.4257+1.023i",  # coarse guess; leading minus exercises joining
            "--csv",
            str(csv),
            "--out",
            str(out),
        ],
        capsys,
    )
    assert code == 0
    g1 = GAUSSIAN_EIGENVALUES[1]
    meta = json.loads(out.read_text())
    polished = complex(meta["gamma"]["re"], meta["gamma"]["im"])
    assert abs(polished - g1) < 1e-9

    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "x,re_plus,im_plus,re_minus,im_minus"
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert data.shape[0] == meta["rows"]
    # components are continuous across the fold at the origin
    i0 = int(np.argmin(np.abs(data[:, 0])))
    for col in (1, 2, 3, 4):
        assert abs(data[i0 - 1, col] - data[i0 + 1, col]) < 1e-2
    # normalization pins f(0, -1) = 1
    assert data[i0, 3] == pytest.approx(1.0, abs=1e-12)


def test_eigfun_rejects_non_eigenvalue(capsys):
    code, _, err = run(
        ["eigfun", "--potential", "gaussian:1", "--gamma", "5+5i", "--csv", "x.csv"],
        capsys,
    )
    assert code == 2
    assert json.loads(err)["error"]["type"]


# ---------------------------------------------------------------- simulate


def test_simulate_payload_and_events(tmp_path, capsys):
    out, csv = tmp_path / "sim.json", tmp_path / "ev.csv"
    code, _, _ = run(
        [
            "simulate",
            "--potential",
            "gaussian:1",
            "-T",
            "500",
            "--seed",
            "5",
            "--out",
            str(out),
            "--csv",
            str(csv),
        ],
        capsys,
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["horizon"] == 500.0
    assert payload["seed"] == 5
    assert payload["n_events"] > 100
    assert payload["ks_statistic"] < 0.2
    assert 0.3 < payload["velocity_fraction_plus"] < 0.7
    assert payload["acf"]["values"][0] == 1.0
    assert payload["acf"]["envelope_rate"] > 0.0

    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "t,x,theta"
    assert len(lines) - 1 == payload["n_events"] + 1  # initial state included
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 0.0 and int(first[2]) == 1


def test_simulate_short_horizon_skips_acf(tmp_path, capsys):
    out = tmp_path / "sim.json"
    code, _, _ = run(
        ["simulate", "--potential", "gaussian:1", "-T", "50", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert json.loads(out.read_text())["acf"] is None


# -------------------------------------------------------------- exit codes


def test_exit_usage_on_missing_potential(capsys):
    code, _, err = run(["spectrum"], capsys)
    assert code == 1
    assert "potential" in err


def test_exit_numerical_with_error_json(capsys):
    code, _, err = run(["spectrum", "--potential", "nonsense:3"], capsys)
    assert code == 2
    blob = json.loads(err)
    assert blob["error"]["type"]
    assert "nonsense" in blob["error"]["message"]


def test_exit_io_on_unwritable_path(capsys):
    code, _, err = run(
        [
            "spectrum",
            "--potential",
            "gaussian:1",
            *REGION,
            "--out",
            "/nonexistent-dir/x.json",
        ],
        capsys,
    )
    assert code == 3


def test_unknown_config_key_is_numerical_error(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("wavelength = 7\n")
    code, _, err = run(["spectrum", "--config", str(bad)], capsys)
    assert code == 2
    assert "wavelength" in json.loads(err)["error"]["message"]
