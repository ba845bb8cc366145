import json

import numpy as np
import pytest

from polynet import cli
from polynet.poly_core import PointCloud


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["gen", "uniform-box", "--n", "2", "--N", "50", "--seed", "7", "--out", str(p)],
                   capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    cloud = cli.load_cloud(str(a))
    assert cloud.N == 50 and cloud.n == 2
    # round trip is exact
    text = cli.cloud_to_csv(cloud)
    again = cli.cloud_from_csv(text)
    np.testing.assert_array_equal(again.points, cloud.points)
    np.testing.assert_array_equal(again.weights, cloud.weights)


@pytest.mark.parametrize("spec", cli.GENERATORS)
def test_all_generators(spec):
    c = cli.generate(spec, 3, 20, seed=1, k=2)
    assert c.n == 3 and np.all(np.isfinite(c.points))
    assert c.N == (8 if spec == "grid" else 20)


def test_gen_grid_and_errors(capsys):
    code, out, _ = run(["gen", "grid", "--n", "2", "--k", "3"], capsys)
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "x1,x2" and len(rows) == 10
    assert {tuple(map(float, r.split(","))) for r in rows[1:]} == {(a, b) for a in (1, 2, 3) for b in (1, 2, 3)}
    assert run(["gen", "gaussian", "--n", "3", "--N", "0"], capsys)[0] == cli.EXIT_INPUT
    assert run(["gen", "spiral", "--n", "3", "--N", "5"], capsys)[0] == cli.EXIT_INPUT


def test_weighted_csv_roundtrip():
    c = PointCloud([[0.1, 0.2], [0.3, -1.0]], [1, 3])
    text = cli.cloud_to_csv(c)
    assert text.splitlines()[0] == "x1,x2,weight"
    back = cli.cloud_from_csv(text)
    np.testing.assert_array_equal(back.weights, c.weights)


@pytest.mark.parametrize("text", ["", "a,b\n1,2\n", "x1,x2\n", "x1,x2\n1,zz\n", "x2,x1\n1,2\n"])
def test_bad_csv(text):
    with pytest.raises(cli.InputError):
        cli.cloud_from_csv(text)


def test_json_reals_17_digits():
    assert cli.dumps(0.1) == "0.10000000000000001"
    assert cli.dumps(1.0) == "1.0"
    assert float(cli.dumps(1 / 3)) == 1 / 3
    assert json.loads(cli.dumps({"a": [1.5, 2], "b": None, "c": True})) == {"a": [1.5, 2], "b": None, "c": True}


@pytest.fixture
def cloud12(tmp_path, capsys):
    p = tmp_path / "c.csv"
    run(["gen", "uniform-box", "--n", "2", "--N", "12", "--seed", "3", "--out", str(p)], capsys)
    return p


def test_net_verify_pipeline(tmp_path, cloud12, capsys):
    cert = tmp_path / "cert.json"
    assert run(["net", "weak2", "--input", str(cloud12), "--out", str(cert)], capsys)[0] == 0
    d = json.loads(cert.read_text())
    assert d["size"] <= 3 and abs(d["guarantee"] - 1 / 6) < 1e-15
    assert d["provenance"]["seed"] == 0 and d["provenance"]["tol"] == 1e-9
    rep = tmp_path / "rep.json"
    code, _, _ = run(["verify", "--input", str(cloud12), "--certificate", str(cert),
                      "--mode", "exact", "--out", str(rep)], capsys)
    assert code == 0 and json.loads(rep.read_text())["verified"]
    # dropping a net point lets the adversary win
    code, out, _ = run(["verify", "--input", str(cloud12), "--certificate", str(cert), "--drop", "0"],
                       capsys)
    assert code == cli.EXIT_FAILED and not json.loads(out)["verified"]
    code, out, _ = run(["witness", "--input", str(cloud12), "--certificate", str(cert), "--drop", "0"],
                       capsys)
    assert code == cli.EXIT_FAILED and json.loads(out)["kept_mass"] == 0
    code, out, _ = run(["verify", "--input", str(cloud12), "--certificate", str(cert),
                        "--mode", "heuristic", "--iterations", "300"], capsys)
    assert code == 0


def test_net_outputs_byte_identical(tmp_path, cloud12, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(["net", "strong", "--D", "2", "--input", str(cloud12), "--out", str(p)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_strong_d1(tmp_path, cloud12, capsys):
    code, out, _ = run(["net", "strong", "--D", "1", "--input", str(cloud12)], capsys)
    d = json.loads(out)
    assert code == 0 and d["size"] <= 3 and abs(d["guarantee"] - 1 / 3) < 1e-15


def test_net_argument_errors(cloud12, capsys):
    assert run(["net", "weak2", "--D", "3", "--input", str(cloud12)], capsys)[0] == cli.EXIT_INPUT
    assert run(["net", "strong", "--input", str(cloud12)], capsys)[0] == cli.EXIT_INPUT
    assert run(["net", "strong", "--D", "2", "--input", "/nonexistent.csv"], capsys)[0] == cli.EXIT_INPUT


def test_exact_cap_exit(tmp_path, capsys):
    c = tmp_path / "c25.csv"
    cert = tmp_path / "c25.json"
    run(["gen", "uniform-box", "--n", "2", "--N", "25", "--out", str(c)], capsys)
    run(["net", "strong", "--D", "1", "--input", str(c), "--out", str(cert)], capsys)
    code, _, err = run(["verify", "--input", str(c), "--certificate", str(cert)], capsys)
    assert code == cli.EXIT_CAPABILITY and "capped" in err


def test_depth_command(cloud12, capsys):
    code, out, _ = run(["depth", "--input", str(cloud12), "--point", "0,0"], capsys)
    d = json.loads(out)
    assert code == 0 and 0 <= d["depth"] <= 1 and d["exact"]
    code, out, _ = run(["depth", "--input", str(cloud12)], capsys)
    assert json.loads(out)["depth"] >= 1 / 3 - 1e-9
    assert run(["depth", "--input", str(cloud12), "--point", "1,2,3"], capsys)[0] == cli.EXIT_INPUT


def test_bounds_and_griddim(capsys):
    code, out, _ = run(["bounds", "--n", "2", "--k", "2"], capsys)
    d = json.loads(out)
    assert code == 0 and (d["trivial_upper"], d["lower_item2"], d["upper_item3"]) == (15, 4, 12)
    code, out, _ = run(["griddim", "--n", "2", "--k", "2"], capsys)
    d = json.loads(out)
    assert (d["grid_size"], d["restriction_rank"], d["vanishing_dim"], d["lower_bound_check"]) == (4, 4, 11, True)
    assert run(["bounds", "--n", "100", "--k", "100000"], capsys)[0] == cli.EXIT_INPUT
    code, out, _ = run(["griddim", "--n", "2", "--k", "2", "--format", "csv"], capsys)
    assert out.splitlines()[0] == "key,value" and "vanishing_dim,11" in out
