from settings.settings import _Settings, settings


def test_defaults():
    assert settings.solver.F == 255
    assert settings.solver.n_d == 4
    assert settings.solver.restart == 50
    assert settings.flt.extended_precision is True
    assert settings.moments.cache_dir is None


def test_nested_environment_overrides(monkeypatch):
    monkeypatch.setenv("AXISCAT_SOLVER__K", "2.5")
    monkeypatch.setenv("AXISCAT_RUNTIME__THREADS", "4")
    monkeypatch.setenv("AXISCAT_MOMENTS__CACHE_DIR", "/tmp/moments")
    overridden = _Settings()
    assert overridden.solver.k == 2.5
    assert overridden.solver.F == 255
    assert overridden.runtime.threads == 4
    assert overridden.moments.cache_dir == "/tmp/moments"
