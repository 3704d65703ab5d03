import numpy as np
import pytest

import ccinv


def value(c):
    return complex(c["re"], c["im"])


def test_diagonal_trace_and_oracle():
    m = ccinv.Matrix.from_coo(2, np.array([0, 1]), np.array([0, 1]), np.array([2.0, 4.0]))
    assert m.order == 2 and m.nnz == 2 and not m.is_complex
    assert ccinv.exact_trace(m) == pytest.approx(0.75)
    rep = ccinv.estimate(m, "oracle")
    assert value(rep["estimate"]) == pytest.approx(0.75)
    rep = ccinv.estimate(m, "cc", noise="gaussian", tol=2e-3)
    assert rep["converged"]
    assert abs(value(rep["estimate"]).real - 0.75) < 3 * rep["mc_std_error"]


def test_dirac_matrix_shape_and_estimators_agree():
    d = ccinv.dirac(3, 3, 3, 3, 0.1)
    assert d.is_complex and d.order == 324 and d.nnz == 56 * 81
    exact = ccinv.exact_trace(d)
    assert abs(exact.imag) < 1e-10
    for method in ("cc", "se"):
        rep = ccinv.estimate(d, method, tol=2e-3)
        assert abs(value(rep["estimate"]) - exact) < 3 * rep["mc_std_error"]


def test_mixed_model_and_coo_round_trip(tmp_path):
    w = ccinv.wu_schaeffer(100, 10, seed=2)
    assert w.order == 110
    rows, cols, vals = w.to_coo()
    back = ccinv.Matrix.from_coo(w.order, rows, cols, vals)
    path = tmp_path / "w.mtx"
    back.write(str(path))
    again = ccinv.Matrix.read(str(path))
    assert again.nnz == w.nnz
    assert ccinv.exact_trace(again) == pytest.approx(ccinv.exact_trace(w))
    assert ccinv.precheck(w)["passed"]


def test_elements_and_replicates():
    w = ccinv.wu_schaeffer(60, 6, seed=3)
    rep = ccinv.estimate(w, "cc", entries=[(0, 0), (7, 7)], tol=5e-3, replicates=3, jobs=2)
    assert len(rep["entries"]) == 2
    assert rep["replicates"] == 3
    assert rep["empirical_std_error"] is not None


def test_errors_map_to_python_exceptions():
    bad = ccinv.Matrix.from_coo(2, np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1]),
                                np.array([1.0, 3.0, 3.0, 1.0]))
    assert not ccinv.precheck(bad)["passed"]
    with pytest.raises(ccinv.DivergenceError):
        ccinv.estimate(bad, "cc")
    with pytest.raises(ccinv.Error):
        ccinv.Matrix.read("/nonexistent/file.mtx")


def test_effective_length_of_white_noise():
    x = np.random.default_rng(1).standard_normal(100_000)
    assert ccinv.effective_length(x) == pytest.approx(100_000, rel=0.1)
    assert ccinv.mc_std_error(x) == pytest.approx(np.std(x, ddof=1) / np.sqrt(100_000), rel=0.1)
