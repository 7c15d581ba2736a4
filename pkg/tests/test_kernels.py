import numpy as np
import pytest

from entropyfs import _kernels
from entropyfs._kernels import (
    BACKEND,
    HAS_NUMBA,
    _lux_rows_numpy,
    luxemburg_rows,
    young_array,
)


@pytest.fixture(scope="module")
def tables(rng=None):
    r = np.random.default_rng(31415)
    vals = r.uniform(0.0, 5.0, (64, 33))
    wgt = np.ones((64, 33))
    wgt[:, -1] = r.uniform(0.0, 1.0, 64)  # fractional boundary column
    wgt[::7, -1] = 0.0  # padding
    return vals, wgt


KINDS = [
    (_kernels.YOUNG_POWER, 2.0),
    (_kernels.YOUNG_LOGPOW, 1.0),
    (_kernels.YOUNG_LOGPOW, 2.0),
    (_kernels.YOUNG_LOGLOG, 1.0),
    (_kernels.YOUNG_EXPPOW, 0.5),
    (_kernels.YOUNG_EXPPOW, 1.0),
]


@pytest.mark.parametrize("code,prm", KINDS)
def test_backends_agree(code, prm, tables):
    vals, wgt = tables
    a = _lux_rows_numpy(vals, wgt, code, prm, 1e-10, 200)
    b = luxemburg_rows(vals, wgt, code, prm)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-300)


@pytest.mark.skipif(not HAS_NUMBA, reason="numba unavailable")
@pytest.mark.parametrize("code,prm", KINDS)
def test_numba_path_agrees(code, prm, tables):
    from entropyfs._kernels import _lux_rows_numba

    vals, wgt = tables
    a = _lux_rows_numpy(vals, wgt, code, prm, 1e-10, 200)
    b = _lux_rows_numba(vals, wgt, code, prm, 1e-10, 200)
    assert np.allclose(a, b, rtol=1e-9)


def test_zero_rows_return_zero():
    vals = np.zeros((3, 4))
    wgt = np.ones((3, 4))
    out = luxemburg_rows(vals, wgt, _kernels.YOUNG_LOGPOW, 1.0)
    assert (out == 0.0).all()


def test_young_array_overflow_is_inf():
    out = young_array(_kernels.YOUNG_EXPPOW, 1.0, np.array([1e6]))
    assert np.isinf(out[0])


def test_young_array_zero_exact():
    for code, prm in KINDS:
        assert young_array(code, prm, np.array([0.0]))[0] == 0.0


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv("ENTROPYFS_BACKEND", "numpy")
    assert _kernels._pick_backend() == "numpy"
    monkeypatch.delenv("ENTROPYFS_BACKEND")
    assert _kernels._pick_backend() == ("numba" if HAS_NUMBA else "numpy")


def test_active_backend_is_valid():
    assert BACKEND in ("numba", "numpy")
