import math

import numpy as np
import pytest

import mecho


def small_problem(lines=6, sigma=0.01):
    truth = mecho.generate_phantom(16, 16, 3)
    mask = mecho.generate_mask(16, 16, lines, 3, per_echo_distinct=True, seed=1)
    return truth, mecho.simulate_acquisition(truth, mask, sigma, seed=2)


def test_phantom_layout():
    x = mecho.generate_phantom(32, 24, 5)
    assert x.shape == (5, 32, 24)
    assert x.dtype == np.float64
    assert np.all(x[1:] <= x[:-1] + 1e-15)


def test_fft_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    np.testing.assert_allclose(mecho.fft2_unitary(x), np.fft.fft2(x) / 8.0, atol=1e-12)


def test_row_soft_threshold():
    out = mecho.row_soft_threshold(np.array([[3.0, 4.0], [0.1, 0.1]]), 2.5)
    np.testing.assert_allclose(out, [[1.5, 2.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        mecho.row_soft_threshold(np.ones((2, 2)), -1.0)


def test_haar_roundtrip():
    x = np.random.default_rng(1).standard_normal((16, 16))
    c = mecho.haar_dwt2(x, 3)
    assert math.isclose(np.linalg.norm(c), np.linalg.norm(x), rel_tol=1e-12)
    np.testing.assert_allclose(mecho.haar_idwt2(c, 3), x, atol=1e-12)


def test_reconstruct_every_method():
    truth, y = small_problem()
    zf = mecho.snr_db(truth, mecho.adjoint(y))
    params = {"patch_size": 4, "patch_stride": 2, "max_outer_iters": 5}
    for name in mecho.method_names():
        out = mecho.reconstruct(y, name, params)
        assert out["image"].shape == truth.shape
        assert out["params"]["max_outer_iters"] == 5
        assert mecho.snr_db(truth, out["image"]) >= zf - 1e-9 or name == "zero_filled"


def test_errors_are_python_exceptions():
    _, y = small_problem()
    with pytest.raises(ValueError, match="valid methods"):
        mecho.reconstruct(y, "bogus")
    with pytest.raises(ValueError, match="unknown params key"):
        mecho.reconstruct(y, "cs_analysis", {"lamda": 0.1})


def test_mef_roundtrip(tmp_path):
    x = mecho.generate_phantom(8, 8, 2).astype(np.float32).astype(np.float64)
    mecho.save_mef(str(tmp_path / "x"), x)
    np.testing.assert_array_equal(mecho.load_mef(str(tmp_path / "x")), x)


def test_defaults():
    p = mecho.default_params("tl_rowsparse")
    assert p["gamma"] > 0
    assert set(mecho.method_names()) == {"zero_filled", "cs_analysis", "dl_sparse", "dl_rowsparse", "tl_rowsparse"}
