"""
Exact field of a homogeneous sphere under the plane wave e^{ikz}.

With radius a and index n0 the modes are

    interior   a_n (rho/a)^n jt_n(n0 k rho)
    scattered  b_n [d_n (rho/a)^n jt_n(k rho) + i (a/rho)^(n+1) yt_n(k rho)],
    d_n = -(ka)^(2n+1) / ((2n-1)!! (2n+1)!!),

so the interface system never meets the (2n-1)!! growth of the unscaled form.
"""
import math
from typing import Callable, Optional

import numpy as np
from loguru import logger

from persistent.model.mie import MieSolution
from persistent.model.radial import ModalField, RadialGrid
from settings.settings import settings
from utils.besselmod import (jtilde_derivative, jtilde_table, power_over_double_factorial, power_ratio,
                             ytilde_derivative, ytilde_table)
from utils.errors import InvalidArgumentError, MieResonanceError
from utils.orthopoly import legendre_table

I_POWERS = np.array([1.0, 1j, -1.0, -1j])


def default_n_max(k: float, r_max: float) -> int:
    return math.ceil(k * r_max) + 40


def mie_solve(
    k: float, n_max: Optional[int] = None, radius: float = 1.0, index: float = 2.0, r_max: Optional[float] = None
) -> MieSolution:
    if k <= 0:
        raise InvalidArgumentError(f"wavenumber must be positive, got {k}")
    if n_max is None:
        n_max = default_n_max(k, r_max if r_max is not None else settings.solver.r_max)
    ka = k * radius
    inner = index * ka
    n = np.arange(n_max + 1)
    jt_in = jtilde_table(n_max + 1, inner)
    djt_in = jtilde_derivative(n_max, inner, jt_in)[: n_max + 1]
    jt_out = jtilde_table(n_max + 1, ka)
    djt_out = jtilde_derivative(n_max, ka, jt_out)[: n_max + 1]
    jt_in, jt_out = jt_in[: n_max + 1], jt_out[: n_max + 1]
    yt_out = ytilde_table(n_max, ka)
    dyt_out = ytilde_derivative(n_max, ka, yt_out)
    s = power_over_double_factorial(n_max, ka, -1)
    # d_n = -ka s_n(ka) g_n(ka)
    delta = -ka * s * power_over_double_factorial(n_max, ka, 1)
    incident = I_POWERS[n % 4] * s

    a11 = jt_in
    a12 = -(delta * jt_out + 1j * yt_out)
    a21 = n * jt_in + inner * djt_in
    a22 = -(delta * (n * jt_out + ka * djt_out) + 1j * (-(n + 1) * yt_out + ka * dyt_out))
    r1 = incident * jt_out
    r2 = incident * (n * jt_out + ka * djt_out)

    det = a11 * a22 - a12 * a21
    size = np.abs(a11 * a22) + np.abs(a12 * a21)
    singular = np.abs(det) <= 1e-14 * size
    if np.any(singular):
        raise MieResonanceError(int(np.argmax(singular)))
    a_scaled = (r1 * a22 - a12 * r2) / det
    b_scaled = (a11 * r2 - a21 * r1) / det

    res1 = a11 * a_scaled + a12 * b_scaled - r1
    res2 = a21 * a_scaled + a22 * b_scaled - r2
    scale = np.maximum(
        np.abs(a11 * a_scaled) + np.abs(a12 * b_scaled) + np.abs(r1),
        np.abs(a21 * a_scaled) + np.abs(a22 * b_scaled) + np.abs(r2),
    )
    residuals = np.maximum(np.abs(res1), np.abs(res2)) / np.where(scale > 0, scale, 1.0)

    tail = abs(b_scaled[-1]) + abs(a_scaled[-1])
    if tail > 1e-15:
        logger.warning("mie tail {:.2e} above 1e-15 at n_max={}", tail, n_max)
    return MieSolution(
        k=k, radius=radius, index=index, a_scaled=a_scaled, b_scaled=b_scaled, delta=delta, residuals=residuals
    )


def _radial_terms(sol: MieSolution, rho: np.ndarray) -> np.ndarray:
    """
    Mode values of the total field minus the exterior incident wave, shape (n_max+1,) + rho.shape:
    interior modes for rho <= a, scattered modes outside.
    """
    n_max, a, k = sol.n_max, sol.radius, sol.k
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * rho.ndim)
    inside = rho <= a
    values = np.zeros((n_max + 1,) + rho.shape, dtype=np.complex128)
    if np.any(inside):
        r_in = rho[inside]
        power = power_ratio(r_in[None, :], a, n.reshape(-1, 1))
        values[:, inside] = sol.a_scaled[:, None] * power * jtilde_table(n_max, sol.index * k * r_in)
    if np.any(~inside):
        r_out = rho[~inside]
        ka = k * a
        s = power_over_double_factorial(n_max, ka, -1)[:, None]
        growing = -ka * s * power_over_double_factorial(n_max, k * r_out, 1) * jtilde_table(n_max, k * r_out)
        decaying = 1j * power_ratio(a, r_out[None, :], n.reshape(-1, 1) + 1) * ytilde_table(n_max, k * r_out)
        values[:, ~inside] = sol.b_scaled[:, None] * (growing + decaying)
    return values


def eval_exact_cos(sol: MieSolution, rho, cos_theta) -> np.ndarray:
    """
    Total field u at (rho, cos theta), arrays broadcast against each other.
    """
    rho, t = np.broadcast_arrays(np.asarray(rho, dtype=np.float64), np.asarray(cos_theta, dtype=np.float64))
    if np.any(rho < 0):
        raise InvalidArgumentError("radius must be non-negative")
    modes = _radial_terms(sol, rho)
    legendre = legendre_table(sol.n_max, np.clip(t, -1.0, 1.0))
    total = np.sum(modes * legendre, axis=0)
    outside = rho > sol.radius
    return np.where(outside, total + np.exp(1j * sol.k * rho * t), total)


def eval_exact(sol: MieSolution, rho, theta) -> np.ndarray:
    return eval_exact_cos(sol, rho, np.cos(theta))


def eval_exact_radial_derivative(sol: MieSolution, rho, cos_theta) -> np.ndarray:
    """
    du/drho at (rho, cos theta), differentiating every series term.
    """
    rho, t = np.broadcast_arrays(np.asarray(rho, dtype=np.float64), np.asarray(cos_theta, dtype=np.float64))
    n_max, a, k = sol.n_max, sol.radius, sol.k
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * rho.ndim)
    legendre = legendre_table(n_max, t)
    inside = rho <= a
    if np.any(rho[inside] == 0):
        raise InvalidArgumentError("radial derivative is evaluated for rho > 0")
    z_in = sol.index * k * rho
    z_out = k * rho
    jt_in = jtilde_table(n_max + 1, z_in)
    power_in = np.where(inside, rho / a, 1.0) ** n
    d_in = sol.a_scaled.reshape(n.shape) * power_in * (
        n / rho * jt_in[: n_max + 1] + sol.index * k * jtilde_derivative(n_max, z_in, jt_in)
    )
    ka = k * a
    s = power_over_double_factorial(n_max, ka, -1).reshape(n.shape)
    jt_out = jtilde_table(n_max + 1, z_out)
    yt_out = ytilde_table(n_max, z_out)
    g = power_over_double_factorial(n_max, z_out, 1)
    growing = -ka * s * g * (n / rho * jt_out[: n_max + 1] + k * jtilde_derivative(n_max, z_out, jt_out))
    decay = np.where(inside, 1.0, a / rho) ** (n + 1)
    decaying = 1j * decay * (-(n + 1) / rho * yt_out + k * ytilde_derivative(n_max, z_out, yt_out))
    d_out = sol.b_scaled.reshape(n.shape) * (growing + decaying)
    incident = 1j * k * t * np.exp(1j * k * rho * t)
    interior = np.sum(d_in * legendre, axis=0)
    exterior = np.sum(d_out * legendre, axis=0) + incident
    return np.where(inside, interior, exterior)


class MieReference:
    """
    Exact field of a sphere centred at z = shift under e^{ik(z - shift)}, evaluated in
    the frame of the origin.
    """

    def __init__(self, solution: MieSolution, shift: float = 0.0) -> None:
        self.solution = solution
        self.shift = shift

    def __call__(self, rho, cos_theta) -> np.ndarray:
        rho, t = np.broadcast_arrays(np.asarray(rho, dtype=np.float64), np.asarray(cos_theta, dtype=np.float64))
        if self.shift == 0:
            return eval_exact_cos(self.solution, rho, t)
        d = self.shift
        z = rho * t - d
        local = np.sqrt(np.maximum(rho * rho + d * d - 2.0 * rho * d * t, 0.0))
        local_t = np.where(local > 0, z / np.where(local > 0, local, 1.0), 1.0)
        return eval_exact_cos(self.solution, local, np.clip(local_t, -1.0, 1.0))


def sample_angles(count: Optional[int] = None) -> np.ndarray:
    """
    Gauss-Legendre nodes in cos theta used for sup-norm errors.
    """
    return np.polynomial.legendre.leggauss(count or settings.study.gauss_angles)[0]


def field_error(
    approx: ModalField,
    reference: Callable[[np.ndarray, np.ndarray], np.ndarray],
    grid: RadialGrid,
    cos_theta: Optional[np.ndarray] = None,
) -> float:
    """
    max |sum_n approx_n P_n - reference| over grid nodes x angles.
    """
    t = sample_angles() if cos_theta is None else np.asarray(cos_theta)
    legendre = legendre_table(approx.F, t)
    approx_values = np.tensordot(approx.values, legendre, axes=([-1], [0]))
    rho = np.broadcast_to(grid.nodes[..., None], approx_values.shape)
    exact = reference(rho, np.broadcast_to(t, approx_values.shape))
    return float(np.max(np.abs(approx_values - exact)))


def exact_modal_field(sol: MieSolution, grid: RadialGrid, F: int) -> ModalField:
    """
    Legendre coefficients of the exact total field at the grid nodes, modes 0..F.
    """
    if F > sol.n_max:
        raise InvalidArgumentError(f"solution has {sol.n_max + 1} modes, {F + 1} requested")
    rho = grid.nodes
    modes = _radial_terms(sol, rho)[: F + 1]
    outside = rho > sol.radius
    n = np.arange(F + 1)
    incident = (I_POWERS[n % 4][:, None, None] * power_over_double_factorial(F, sol.k * rho, -1)
                * jtilde_table(F, sol.k * rho))
    modes = modes + np.where(outside[None], incident, 0.0)
    return ModalField(values=np.moveaxis(modes, 0, -1))
