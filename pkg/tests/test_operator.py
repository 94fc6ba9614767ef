import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from oracles import kernel_brute_force
from persistent.model.radial import ModalField
from persistent.model.scatterer import HollowedSphere, HomogeneousSphere, OffsetSphere
from services.flt_service import build_plan, iflt
from services.mie_service import MieReference, field_error, mie_solve
from services.operator_service import (OperatorService, angular_integrate, apply_forward, apply_kernel,
                                       solver_config, synthesize)
from services.radial_kernel_service import build_grid
from settings.settings import settings
from utils.errors import InvalidArgumentError
from utils.orthopoly import legendre_table


@pytest.fixture(scope="module")
def service() -> OperatorService:
    return OperatorService()


def _random_field(rng, shape) -> ModalField:
    return ModalField(values=rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_solver_config_overrides_leave_settings_alone():
    config = solver_config(F=7, n_i=None, k=2.0)
    assert config.F == 7 and config.k == 2.0
    assert config.n_i == settings.solver.n_i
    assert settings.solver.F == 255
    assert config.transform_size == 32
    assert solver_config(F=0).transform_size == 2


def test_angular_integrate_matches_gauss_legendre(rng):
    F = 8
    plan = build_plan(32)
    u = rng.standard_normal((3, F + 1)) + 1j * rng.standard_normal((3, F + 1))
    m = np.zeros((3, 32))
    m[:, : 2 * F + 1] = rng.standard_normal((3, 2 * F + 1))
    result = angular_integrate(plan, u, iflt(plan, m))
    t, w = leggauss(40)
    p = legendre_table(2 * F, t)
    product = (u @ p[: F + 1]) * (m[:, : 2 * F + 1] @ p)
    np.testing.assert_allclose(result, (product * w) @ p[: F + 1].T, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        angular_integrate(plan, np.ones((1, 40)), iflt(plan, m[:1]))


def test_fast_operator_matches_dense_brute_force(rng, service):
    config = solver_config(F=8, n_i=4, n_d=4, r_max=2.0, k=1.0)
    ctx = service.build_context(config, HollowedSphere(beta=2.0))
    v = _random_field(rng, (4, 4, 9))
    fast = apply_kernel(ctx, v).values

    t, w = leggauss(64)
    p = legendre_table(2 * config.F, t)
    u_values = v.values @ p[: config.F + 1]
    m_values = ctx.contrast @ p
    density = (u_values * m_values * w) @ p[: config.F + 1].T
    brute = kernel_brute_force(ctx.grid, density, config.k)
    assert np.max(np.abs(fast - brute)) <= 1e-6 * np.max(np.abs(brute))


def test_forward_operator_is_linear(rng, service):
    config = solver_config(F=6, n_i=3, n_d=3, r_max=2.0)
    ctx = service.build_context(config, HollowedSphere())
    v, w = _random_field(rng, (3, 3, 7)), _random_field(rng, (3, 3, 7))
    a, b = 0.7 - 0.2j, -1.3
    combined = apply_forward(ctx, a * v + b * w).values
    separate = a * apply_forward(ctx, v).values + b * apply_forward(ctx, w).values
    np.testing.assert_allclose(combined, separate, atol=1e-12 * np.max(np.abs(separate)))


def test_field_shape_checked(rng, service):
    ctx = service.build_context(solver_config(F=4, n_i=2, n_d=2, r_max=2.0), HollowedSphere())
    with pytest.raises(InvalidArgumentError):
        apply_kernel(ctx, _random_field(rng, (2, 2, 6)))


def test_vacuum_solution_is_incident_field(service):
    config = solver_config(F=40, n_i=4, n_d=4, r_max=4.0, k=1.0)
    result = service.solve_scattering(config, HomogeneousSphere(index=1.0))
    assert result.iterations == 0
    np.testing.assert_array_equal(result.field.values, result.incident.values)
    grid = build_grid(4.0, 4, 4)
    t = np.linspace(-1, 1, 7)
    values = synthesize(result.field.values, t)
    np.testing.assert_allclose(values, np.exp(1j * grid.nodes[..., None] * t), atol=1e-12)


def test_weak_scatterer_follows_born_approximation(service):
    contrast = 1e-4
    config = solver_config(F=12, n_i=4, n_d=4, r_max=2.0, k=1.0, tol=1e-13)
    ctx = service.build_context(config, HomogeneousSphere(index=np.sqrt(1.0 - contrast)))
    result = service.solve(ctx)
    first_order = 0.5j * apply_kernel(ctx, ctx.incident).values
    remainder = result.field.values - ctx.incident.values - first_order
    assert np.max(np.abs(first_order)) > 1e-6
    assert np.max(np.abs(remainder)) <= 1e-3 * np.max(np.abs(first_order))


def test_thread_count_does_not_change_results(rng):
    config = solver_config(F=6, n_i=3, n_d=3, r_max=2.0)
    v = _random_field(rng, (3, 3, 7))
    serial = OperatorService(threads=1).build_context(config, HollowedSphere())
    threaded = OperatorService(threads=3).build_context(config, HollowedSphere())
    expected = apply_forward(serial, v).values
    np.testing.assert_allclose(apply_forward(threaded, v).values, expected, atol=1e-13 * np.max(np.abs(expected)))


def test_solution_satisfies_integral_equation_off_grid(rng, service):
    config = solver_config(F=8, n_i=4, n_d=4, r_max=2.0, k=1.0, tol=1e-12)
    ctx = service.build_context(config, HollowedSphere(beta=2.0))
    result = service.solve(ctx)
    t, w = leggauss(64)
    p = legendre_table(2 * config.F, t)
    u_values = result.field.values @ p[: config.F + 1]
    density = (u_values * (ctx.contrast @ p) * w) @ p[: config.F + 1].T
    brute = kernel_brute_force(ctx.grid, density, config.k)
    angles = rng.uniform(-1.0, 1.0, 10)
    residual = synthesize(result.field.values - ctx.incident.values - 0.5j * brute, angles)
    assert np.max(np.abs(residual)) <= 1e-6 * np.max(np.abs(synthesize(result.field.values, angles)))


def test_offset_sphere_matches_shifted_exact_field(service):
    config = solver_config(F=64, n_i=16, n_d=4, r_max=4.0, k=1.0)
    model = OffsetSphere()
    result = service.solve_scattering(config, model)
    solution = mie_solve(config.k, radius=model.radius, index=model.index, r_max=config.r_max + model.offset)
    grid = build_grid(config.r_max, config.n_i, config.n_d)
    assert field_error(result.field, MieReference(solution, shift=model.offset), grid) <= 1e-2


def test_moment_tables_in_memory_are_bounded(monkeypatch, tmp_path):
    monkeypatch.setattr(settings.moments, "memory_tables", 2)
    service = OperatorService(cache_dir=str(tmp_path))
    for F in (2, 3, 4):
        service.build_context(solver_config(F=F, n_i=2, n_d=2, r_max=2.0), HomogeneousSphere())
    assert len(service._moments) == 2
    assert [key[3] for key in service._moments] == [3, 4]
    service.build_context(solver_config(F=3, n_i=2, n_d=2, r_max=2.0), HomogeneousSphere())
    assert [key[3] for key in service._moments] == [4, 3]


def test_scatterer_beyond_r_max_rejected(service):
    with pytest.raises(InvalidArgumentError):
        service.build_context(solver_config(F=4, n_i=2, n_d=2, r_max=1.5), HollowedSphere())
    with pytest.raises(InvalidArgumentError):
        service.build_context(solver_config(F=4, n_i=2, n_d=2, r_max=2.5), OffsetSphere())
