import numpy as np
import pytest

from sparseoos import kernels, modelfile
from sparseoos.cli import main
from sparseoos.embed import laplacian_eigenmaps, nystrom_extend_batch
from sparseoos.kernels import Gaussian, Knn, NormalizedHeat
from sparseoos.krr import krr_fit, krr_predict_batch
from sparseoos.matio import MatrixFormatError, read_matrix, write_matrix
from sparseoos.sparse import sparse_fit, sparse_predict_batch


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse rejects bad flags with status 2
        return exc.code


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("pipe")
    assert run("swissroll", "--n", 200, "--seed", 7, "--out-prefix", d / "r_") == 0
    assert run("embed", "--points", d / "r_points.csv", "--temperature", 10, "--knn", 7,
               "--dims", 2, "--out", d / "Y.csv", "--model", d / "emb.model") == 0
    assert run("fit", "--points", d / "r_points.csv", "--embedding", d / "Y.csv",
               "--sigma", 4, "--lambda", 0.1, "--out", d / "krr.model") == 0
    assert run("sparsify", "--model", d / "krr.model", "--epsilon", 0.003, "--out", d / "sp.model") == 0
    return d


def test_swissroll_files(pipeline):
    pts = read_matrix(pipeline / "r_points.csv")
    assert pts.shape == (200, 3)
    assert read_matrix(pipeline / "r_intrinsic.csv").shape == (200, 2)


def test_swissroll_bad_n(tmp_path):
    assert run("swissroll", "--n", 0, "--out-prefix", tmp_path / "x") == 2


def test_embed_output(pipeline):
    y = read_matrix(pipeline / "Y.csv")
    assert y.shape == (200, 2)
    emb = modelfile.load(pipeline / "emb.model")
    np.testing.assert_array_equal(emb.coordinates, y)


def test_embed_usage_errors(pipeline, tmp_path):
    pts = pipeline / "r_points.csv"
    assert run("embed", "--points", pts, "--temperature", 1, "--knn", 200, "--out", tmp_path / "y") == 2
    assert run("embed", "--points", pts, "--temperature", 1, "--knn", 3, "--tau", 1, "--out", tmp_path / "y") == 2
    assert run("embed", "--points", pts, "--knn", 3, "--out", tmp_path / "y") == 2
    assert run("embed", "--points", tmp_path / "missing.csv", "--temperature", 1, "--knn", 3,
               "--out", tmp_path / "y") == 1


def test_embed_zero_eigenvalue(tmp_path, capsys):
    write_matrix(tmp_path / "p.csv", np.zeros((3, 2)))
    assert run("embed", "--points", tmp_path / "p.csv", "--temperature", 1, "--tau", 1, "--dims", 1,
               "--out", tmp_path / "y.csv") == 1
    assert "eigenvalue" in capsys.readouterr().err


def test_fit_residual_and_errors(pipeline, tmp_path, capsys):
    m = modelfile.load(pipeline / "krr.model")
    assert m.relative_residual <= 1e-8
    assert m.lam == 0.1
    pts = pipeline / "r_points.csv"
    assert run("fit", "--points", pts, "--embedding", pipeline / "Y.csv", "--sigma", 4, "--lambda", -1,
               "--out", tmp_path / "m") == 2
    write_matrix(tmp_path / "short.csv", np.ones((5, 2)))
    capsys.readouterr()
    assert run("fit", "--points", pts, "--embedding", tmp_path / "short.csv", "--sigma", 4, "--lambda", 0.1,
               "--out", tmp_path / "m") == 1
    err = capsys.readouterr().err
    assert "5" in err and "200" in err


def test_sparsify_report(pipeline, tmp_path, capsys):
    assert run("sparsify", "--model", pipeline / "krr.model", "--epsilon", 0.003, "--out", tmp_path / "s") == 0
    out = capsys.readouterr().out
    fields = dict(tok.split("=") for tok in out.split())
    assert fields["guarantee"] == "ok"
    assert float(fields["achieved_msd"]) <= 0.003**2 * 1.001
    assert 0 < int(fields["support_vectors"]) < 200


def test_sparsify_huge_epsilon(pipeline, tmp_path, capsys):
    assert run("sparsify", "--model", pipeline / "krr.model", "--epsilon", 100, "--out", tmp_path / "s") == 0
    out = capsys.readouterr().out
    assert "support_vectors=0" in out and "no support vectors" in out
    m = modelfile.load(tmp_path / "s")
    assert m.n_support == 0


def test_sparsify_usage_errors(pipeline, tmp_path):
    for eps in (0, -1):
        assert run("sparsify", "--model", pipeline / "krr.model", "--epsilon", eps, "--out", tmp_path / "s") == 2
    # an embedding model cannot be sparsified
    assert run("sparsify", "--model", pipeline / "emb.model", "--epsilon", 0.1, "--out", tmp_path / "s") == 2


def test_project_models(pipeline, tmp_path):
    q = tmp_path / "q.csv"
    pts = read_matrix(pipeline / "r_points.csv")
    write_matrix(q, pts[:20] + 0.05)
    for name in ("krr.model", "sp.model", "emb.model"):
        assert run("project", "--model", pipeline / name, "--points", q, "--out", tmp_path / f"{name}.csv") == 0
    krr = modelfile.load(pipeline / "krr.model")
    np.testing.assert_array_equal(read_matrix(tmp_path / "krr.model.csv"), krr_predict_batch(krr, pts[:20] + 0.05))
    sp = modelfile.load(pipeline / "sp.model")
    np.testing.assert_array_equal(read_matrix(tmp_path / "sp.model.csv"), sparse_predict_batch(sp, pts[:20] + 0.05))
    emb = modelfile.load(pipeline / "emb.model")
    np.testing.assert_array_equal(read_matrix(tmp_path / "emb.model.csv"), nystrom_extend_batch(emb, pts[:20] + 0.05))


def test_project_tiny_epsilon_matches_krr(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, (30, 2))
    write_matrix(tmp_path / "p.csv", pts)
    write_matrix(tmp_path / "y.csv", rng.standard_normal((30, 2)))
    assert run("fit", "--points", tmp_path / "p.csv", "--embedding", tmp_path / "y.csv", "--sigma", 0.8,
               "--lambda", 0.1, "--out", tmp_path / "k.model") == 0
    assert run("sparsify", "--model", tmp_path / "k.model", "--epsilon", 1e-9, "--out", tmp_path / "s.model") == 0
    for m in ("k", "s"):
        assert run("project", "--model", tmp_path / f"{m}.model", "--points", tmp_path / "p.csv",
                   "--out", tmp_path / f"{m}.csv") == 0
    diff = read_matrix(tmp_path / "k.csv") - read_matrix(tmp_path / "s.csv")
    assert np.max(np.linalg.norm(diff, axis=1)) <= 1e-6


def test_project_empty_support_warns(pipeline, tmp_path, caplog):
    assert run("sparsify", "--model", pipeline / "krr.model", "--epsilon", 100, "--out", tmp_path / "s") == 0
    write_matrix(tmp_path / "q.csv", np.zeros((3, 3)))
    assert run("project", "--model", tmp_path / "s", "--points", tmp_path / "q.csv", "--out", tmp_path / "o") == 0
    np.testing.assert_array_equal(read_matrix(tmp_path / "o"), np.zeros((3, 2)))
    assert "no support vectors" in caplog.text


def test_project_isolated_point(tmp_path, capsys):
    pts = np.array([[0.0], [1.0], [2.0]])
    write_matrix(tmp_path / "p.csv", pts)
    assert run("embed", "--points", tmp_path / "p.csv", "--temperature", 1, "--tau", 1.5, "--dims", 1,
               "--out", tmp_path / "y.csv", "--model", tmp_path / "e.model") == 0
    write_matrix(tmp_path / "q.csv", np.array([[1.0], [100.0]]))
    assert run("project", "--model", tmp_path / "e.model", "--points", tmp_path / "q.csv",
               "--out", tmp_path / "o.csv") == 1
    assert "row 1" in capsys.readouterr().err
    assert not (tmp_path / "o.csv").exists()


def _write_cfg(path, body):
    path.write_text(body, encoding="utf-8")
    return path


def test_sweep_csv(pipeline, tmp_path, capsys):
    cfg = _write_cfg(tmp_path / "s.cfg", f"""# small sweep
points = {pipeline / 'r_points.csv'}
embedding = {pipeline / 'Y.csv'}
kernel = gaussian
sigma = 4
lambda = 0.1, 1
epsilon = 0.002, 0.005, 0.01
""")
    assert run("sweep", "--config", cfg, "--out", tmp_path / "a.csv") == 0
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "epsilon,lambda,sv_count,msd,correlation,class_rate"
    assert len(lines) == 7
    assert run("sweep", "--config", cfg) == 0
    assert capsys.readouterr().out == (tmp_path / "a.csv").read_text()


def test_sweep_relative_paths(pipeline, tmp_path):
    (tmp_path / "p.csv").write_bytes((pipeline / "r_points.csv").read_bytes())
    (tmp_path / "y.csv").write_bytes((pipeline / "Y.csv").read_bytes())
    cfg = _write_cfg(tmp_path / "s.cfg", "points=p.csv\nembedding=y.csv\nkernel=normalized_heat\n"
                     "temperature=10\nknn=7\nlambda=0.1\nepsilon=100\n")
    assert run("sweep", "--config", cfg, "--out", tmp_path / "o.csv") == 0
    assert (tmp_path / "o.csv").read_text().splitlines()[1].split(",")[2] == "0"


@pytest.mark.parametrize(
    "body, line",
    [
        ("points=a\nembedding=b\nkernel=gaussian\nsigma=1\nlambda=0.1\nepsilon=0.1, x\n", "line 6"),
        ("points=a\nfoo=1\n", "line 2"),
        ("# comment\n\nnonsense\n", "line 3"),
        ("kernel=cosine\n", "line 1"),
        ("points=a\nembedding=b\nkernel=gaussian\nsigma=1\nlambda=-1\nepsilon=0.1\n", "line 5"),
    ],
)
def test_sweep_malformed_config(tmp_path, capsys, body, line):
    cfg = _write_cfg(tmp_path / "bad.cfg", body)
    assert run("sweep", "--config", cfg) == 2
    assert line in capsys.readouterr().err


def test_reruns_are_byte_identical(pipeline, tmp_path):
    d = tmp_path
    for tag in ("a", "b"):
        assert run("swissroll", "--n", 200, "--seed", 7, "--out-prefix", d / f"{tag}_") == 0
        assert run("embed", "--points", d / f"{tag}_points.csv", "--temperature", 10, "--knn", 7,
                   "--out", d / f"{tag}_Y.csv", "--model", d / f"{tag}_emb.model") == 0
        assert run("fit", "--points", d / f"{tag}_points.csv", "--embedding", d / f"{tag}_Y.csv",
                   "--sigma", 4, "--lambda", 0.1, "--out", d / f"{tag}_krr.model") == 0
    for name in ("points.csv", "intrinsic.csv", "Y.csv", "emb.model", "krr.model"):
        assert (d / f"a_{name}").read_bytes() == (d / f"b_{name}").read_bytes()
    assert (d / "a_points.csv").read_bytes() == (pipeline / "r_points.csv").read_bytes()


# --- model files ------------------------------------------------------------


def test_model_round_trips(tmp_path):
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((25, 2))
    xs = rng.standard_normal((6, 2))
    for spec in (Gaussian(1.0), NormalizedHeat(1.0, Knn(5))):
        emb = laplacian_eigenmaps(pts, NormalizedHeat(1.0, Knn(5)), 2)
        krr = krr_fit(kernels.bind(spec, pts), emb.coordinates, 0.1)
        sm = sparse_fit(krr, 0.01)
        for model, predict in ((krr, krr_predict_batch), (sm, sparse_predict_batch), (emb, nystrom_extend_batch)):
            modelfile.save(tmp_path / "m", model)
            back = modelfile.load(tmp_path / "m")
            assert type(back) is type(model)
            np.testing.assert_array_equal(predict(back, xs), predict(model, xs))
            # loading and saving again reproduces the file
            modelfile.save(tmp_path / "m2", back)
            assert (tmp_path / "m").read_bytes() == (tmp_path / "m2").read_bytes()


def test_bad_model_file(tmp_path):
    (tmp_path / "m").write_text("[model]\ntype=mystery\n[kernel]\nvariant=gaussian\nsigma=1\n[points]\n0\n")
    with pytest.raises(MatrixFormatError):
        modelfile.load(tmp_path / "m")
