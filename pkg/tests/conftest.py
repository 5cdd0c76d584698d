import pytest

from libs.quadrature import QUADRATURE_SETTINGS, quadrature_settings


@pytest.fixture(autouse=True)
def default_tolerances():
    """CLI runs change the process-wide tolerances; restore them around every test."""
    saved = quadrature_settings(**vars(QUADRATURE_SETTINGS))
    yield
    QUADRATURE_SETTINGS.abs_tol = saved.abs_tol
    QUADRATURE_SETTINGS.rel_tol = saved.rel_tol
    QUADRATURE_SETTINGS.max_subdivisions = saved.max_subdivisions


@pytest.fixture(autouse=True)
def log_file(tmp_path, monkeypatch):
    monkeypatch.setenv("XLAB_LOG", str(tmp_path / "xlab.log"))
    monkeypatch.setenv("XLAB_THREADS", "2")
