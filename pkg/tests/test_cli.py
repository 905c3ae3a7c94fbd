import csv
import subprocess
import sys

import numpy as np
import pytest

from treepdo.cli import label, main, read_function_csv
from treepdo.config import (
    OUTPUT_ENV,
    CapExceededError,
    InvalidValueError,
    RunConfig,
    UnknownKeyError,
    parse_config,
)
from treepdo.quantize import kernel_of_symbol
from treepdo.spectral import build_grid
from treepdo.symbols import builtin_family
from treepdo.verify import format_report, run_verify


# configuration


def test_defaults():
    cfg = parse_config(environ={})
    assert cfg == RunConfig()
    assert cfg.epsilons == (0.4, 0.2, 0.1, 0.05)


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nq = 2\nradius = 3  # trailing\nepsilons = 0.3, 0.1\n")
    cfg = parse_config({"q": "3"}, path, environ={})
    assert cfg.q == 3 and cfg.radius == 3 and cfg.epsilons == (0.3, 0.1)


def test_env_sets_output_dir(tmp_path):
    cfg = parse_config(environ={OUTPUT_ENV: str(tmp_path)})
    assert cfg.output_dir == str(tmp_path)
    cfg = parse_config({"output_dir": "elsewhere"}, environ={OUTPUT_ENV: str(tmp_path)})
    assert cfg.output_dir == "elsewhere"


@pytest.mark.parametrize("overrides,error", [
    ({"q": "1"}, InvalidValueError),
    ({"q": "two"}, InvalidValueError),
    ({"epsilons": "0.1,0.2"}, InvalidValueError),
    ({"epsilons": "0.1,0.1"}, InvalidValueError),
    ({"family": "nope"}, InvalidValueError),
    ({"snodes": "4"}, InvalidValueError),
    ({"radius": "30"}, CapExceededError),
    ({"radius": "9", "q": "3"}, CapExceededError),
    ({"colour": "red"}, UnknownKeyError),
])
def test_config_errors(overrides, error):
    with pytest.raises(error):
        parse_config(overrides, environ={})


def test_unknown_key_in_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("colour = red\n")
    with pytest.raises(UnknownKeyError):
        parse_config(path=path, environ={})
    path.write_text("q 3\n")
    with pytest.raises(InvalidValueError):
        parse_config(path=path, environ={})


def test_error_codes_are_distinct():
    codes = {InvalidValueError.exit_code, UnknownKeyError.exit_code, CapExceededError.exit_code}
    assert len(codes) == 3 and 0 not in codes and 1 not in codes


# subcommands


def test_exit_codes(tmp_path, capsys):
    assert main(["kernel", "--q", "1", "--output-dir", str(tmp_path)]) == 4
    assert main(["kernel", "--radius", "40", "--output-dir", str(tmp_path)]) == 5
    assert main(["sweep", "--radius", "3", "--tail", "3", "--output-dir", str(tmp_path)]) == 4
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert main(["verify", "--config", str(cfg)]) == 3
    err = capsys.readouterr().err
    assert "unknown key" in err and "cap exceeded" in err


def test_kernel_csv(tmp_path, capsys):
    assert main(["kernel", "--radius", "2", "--family", "radial_eps", "--eps", "0.2",
                 "--output-dir", str(tmp_path), "--out", "k.csv"]) == 0
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert lines[0].startswith("# q=2 radius=2 snodes=256 family=radial_eps eps=0.20000000000000001")
    assert lines[1] == "x_word,y_word,d,re,im"
    rows = list(csv.reader(lines[2:]))
    assert len(rows) == 10 * 10
    assert rows[0][:3] == ["o", "o", "0"]
    K = kernel_of_symbol(builtin_family("radial_eps", 2, 0.2), 2, build_grid(2, 256))
    got = np.array([complex(float(r[3]), float(r[4])) for r in rows]).reshape(10, 10)
    assert np.array_equal(got, K.matrix)
    d = np.array([int(r[2]) for r in rows]).reshape(10, 10)
    assert np.array_equal(d, K.distances())


def test_kernel_methods_agree(tmp_path):
    for method in ("grouped", "naive"):
        assert main(["kernel", "--radius", "2", "--method", method, "--output-dir", str(tmp_path),
                     "--out", f"{method}.csv"]) == 0
    a = np.loadtxt(tmp_path / "grouped.csv", delimiter=",", skiprows=2, usecols=(3, 4))
    b = np.loadtxt(tmp_path / "naive.csv", delimiter=",", skiprows=2, usecols=(3, 4))
    assert np.abs(a - b).max() <= 1e-12


def test_kernel_uses_env_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert main(["kernel", "--radius", "1"]) == 0
    assert (tmp_path / "kernel.csv").exists()


def test_transform(tmp_path):
    src = tmp_path / "f.csv"
    src.write_text("vertex,re,im\no,1,0\n0,0.5,-1\n# ignored\n")
    assert read_function_csv(src, 2) == {(): 1 + 0j, (0,): 0.5 - 1j}
    assert main(["transform", "--input", str(src), "--snodes", "64", "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.reader((tmp_path / "transform.csv").read_text().splitlines()))
    assert rows[0] == ["stub", "node_index", "s", "re", "im"]
    assert len(rows) == 1 + 3 * 64
    assert rows[1][0] == "0" and rows[1][1] == "0"


def test_sweep_csv_and_determinism(tmp_path):
    args = ["sweep", "--radius", "3", "--tail", "1", "--epsilons", "0.4,0.2", "--output-dir", str(tmp_path)]
    assert main(args + ["--out", "a.csv"]) == 0
    assert main(args + ["--out", "b.csv"]) == 0
    text = (tmp_path / "a.csv").read_text()
    assert text == (tmp_path / "b.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    assert [float(r["epsilon"]) for r in rows] == [0.4, 0.2]
    assert set(rows[0]) == {"epsilon", "adjoint_norm", "product_norm", "product_tail_bound",
                            *(f"{p}_C{n}" for p in ("adjoint", "product") for n in range(4))}
    assert main(args + ["--out", "c.csv", "--timings"]) == 0
    assert "seconds" in (tmp_path / "c.csv").read_text().splitlines()[0]


def test_sweep_radial_family_adjoint_vanishes(tmp_path):
    assert main(["sweep", "--radius", "3", "--tail", "1", "--family", "bump_profile_only",
                 "--epsilons", "0.4,0.1", "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").read_text().splitlines()))
    assert all(float(r["adjoint_norm"]) <= 1e-10 for r in rows)


def test_label():
    assert label(()) == "o"
    assert label((0, 2, 1)) == "021"


# verification suite


def test_verify_default_passes():
    rows = run_verify(parse_config(environ={}))
    assert rows and all(r.passed for r in rows)
    report = format_report(rows)
    assert report.splitlines()[-1] == f"{len(rows)}/{len(rows)} checks passed"


def test_verify_coarse_grid_fails():
    rows = run_verify(parse_config({"snodes": "8"}, environ={}))
    failed = {r.name for r in rows if not r.passed}
    assert "spectral: |M_0 - 1|" in failed
    assert not any(name.startswith(("tree", "boundary")) for name in failed)


def test_verify_q3_passes():
    rows = run_verify(parse_config({"q": "3", "radius": "3"}, environ={}))
    assert all(r.passed for r in rows)


def test_verify_exit_status(tmp_path):
    assert main(["verify", "--output-dir", str(tmp_path), "--out", "report.txt"]) == 0
    assert (tmp_path / "report.txt").read_text().rstrip().endswith("checks passed")
    assert main(["verify", "--snodes", "8"]) == 1


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "treepdo", "kernel", "--radius", "1",
                          "--output-dir", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "kernel" in res.stdout
