from typing import Optional

import numpy as np
from loguru import logger
from scipy.special import gammaln

from persistent.model.scatterer import (HollowedSphere, HomogeneousSphere, OffsetSphere, ScattererModel,
                                        TabulatedScatterer)
from repository.scatterer_table_repository import ScattererTableRepository
from utils.besselmod import jtilde_table, power_over_double_factorial
from utils.errors import InvalidArgumentError
from utils.orthopoly import legendre_derivative_table, legendre_table

I_POWERS = np.array([1.0, 1j, -1.0, -1j])


def _check_offset(model: OffsetSphere) -> None:
    if model.offset <= model.radius:
        raise InvalidArgumentError(
            f"offset sphere needs offset > radius, got offset={model.offset}, radius={model.radius}"
        )


def hollowed_even_coeffs(beta: float, count: int) -> np.ndarray:
    """
    Legendre coefficients m_{2n}, n = 0..count-1, of -|t|^beta.

    m_{2n} = -(4n+1) sqrt(pi) 2^(-beta-1) G(1+beta) / (G(1+beta/2) G(3/2+beta/2))
             * prod_{k<n} (beta/2 - k) / (beta/2 + 3/2 + k),
    accumulated as log-magnitude and sign so integer beta/2 gives exact zeros.
    """
    half = beta / 2.0
    log_lead = 0.5 * np.log(np.pi) - (beta + 1.0) * np.log(2.0) + gammaln(1.0 + beta) - gammaln(1.0 + half) - gammaln(1.5 + half)
    k = np.arange(max(count - 1, 0))
    numer = half - k
    denom = half + 1.5 + k
    with np.errstate(divide="ignore"):
        log_terms = np.log(np.abs(numer)) - np.log(denom)
    signs = np.sign(numer)
    log_prod = np.concatenate([[0.0], np.cumsum(log_terms)])
    sign_prod = np.concatenate([[1.0], np.cumprod(signs)])
    n = np.arange(count)
    return -(4 * n + 1) * sign_prod * np.exp(log_lead + log_prod)


def contrast_coeffs(model: ScattererModel, rho: float, l_max: int) -> np.ndarray:
    """
    Legendre coefficients m_0..m_{l_max} of the contrast 1 - n^2 on the sphere of radius rho.
    """
    if rho < 0:
        raise InvalidArgumentError(f"radius must be non-negative, got {rho}")
    coeffs = np.zeros(l_max + 1, dtype=np.complex128)
    if isinstance(model, HomogeneousSphere):
        if rho <= model.radius:
            coeffs[0] = 1.0 - model.index ** 2
        return coeffs
    if isinstance(model, OffsetSphere):
        _check_offset(model)
        if rho < model.offset - model.radius or rho > model.offset + model.radius:
            return coeffs
        c = (rho ** 2 + model.offset ** 2 - model.radius ** 2) / (2.0 * model.offset * rho)
        c = min(max(c, -1.0), 1.0)
        contrast = 1.0 - model.index ** 2
        coeffs[0] = contrast * (1.0 - c) / 2.0
        if l_max >= 1:
            l = np.arange(1, l_max + 1)
            deriv = legendre_derivative_table(l_max, c)[1:]
            # sqrt(1-c^2) P_l^1(c) (l-1)!/(l+1)! = (1-c^2) P_l'(c) / (l(l+1))
            coeffs[1:] = contrast * (2 * l + 1) / 2.0 * (1.0 - c * c) * deriv / (l * (l + 1))
        return coeffs
    if isinstance(model, HollowedSphere):
        if model.inner <= rho <= model.outer:
            even = hollowed_even_coeffs(model.beta, l_max // 2 + 1)
            coeffs[0::2] = even
        return coeffs
    if isinstance(model, TabulatedScatterer):
        return _tabulated_coeffs(model, rho, l_max)
    raise InvalidArgumentError(f"unknown scatterer model {type(model).__name__}")


def offset_coeffs_difference_form(model: OffsetSphere, rho: float, l_max: int) -> np.ndarray:
    """
    Same coefficients as contrast_coeffs written as (1-n0^2)(P_{l-1}(c) - P_{l+1}(c))/2.
    """
    _check_offset(model)
    coeffs = np.zeros(l_max + 1)
    if rho < model.offset - model.radius or rho > model.offset + model.radius:
        return coeffs
    c = (rho ** 2 + model.offset ** 2 - model.radius ** 2) / (2.0 * model.offset * rho)
    c = min(max(c, -1.0), 1.0)
    p = legendre_table(l_max + 1, c)
    lower = np.concatenate([[1.0], p[: l_max]])
    return (1.0 - model.index ** 2) * (lower - p[1 : l_max + 2]) / 2.0


def _tabulated_coeffs(model: TabulatedScatterer, rho: float, l_max: int) -> np.ndarray:
    coeffs = np.zeros(l_max + 1, dtype=np.complex128)
    radii = model.radii
    if rho < radii[0] or rho > radii[-1]:
        return coeffs
    available = min(l_max + 1, model.coeffs.shape[1])
    for l in range(available):
        column = model.coeffs[:, l]
        coeffs[l] = np.interp(rho, radii, column.real) + 1j * np.interp(rho, radii, column.imag)
    return coeffs


def contrast_value(model: ScattererModel, rho: float, t: float) -> float:
    """
    Pointwise contrast m(rho, cos theta = t).
    """
    if isinstance(model, HomogeneousSphere):
        return 1.0 - model.index ** 2 if rho <= model.radius else 0.0
    if isinstance(model, OffsetSphere):
        distance_sq = rho ** 2 + model.offset ** 2 - 2.0 * rho * model.offset * t
        return 1.0 - model.index ** 2 if distance_sq <= model.radius ** 2 else 0.0
    if isinstance(model, HollowedSphere):
        return -abs(t) ** model.beta if model.inner <= rho <= model.outer else 0.0
    raise InvalidArgumentError(f"no pointwise contrast for {type(model).__name__}")


def support_radius(model: ScattererModel) -> float:
    """
    Smallest R with m = 0 for every rho > R.
    """
    if isinstance(model, HomogeneousSphere):
        return model.radius if model.index != 1.0 else 0.0
    if isinstance(model, OffsetSphere):
        return model.offset + model.radius
    if isinstance(model, HollowedSphere):
        return model.outer
    if isinstance(model, TabulatedScatterer):
        nonzero = np.flatnonzero(np.any(model.coeffs != 0, axis=1))
        return float(model.radii[nonzero[-1]]) if nonzero.size else 0.0
    raise InvalidArgumentError(f"unknown scatterer model {type(model).__name__}")


def incident_shift(model: ScattererModel) -> float:
    """
    Offset of the incident phase e^{ik(z - d)}; only the offset sphere shifts it.
    """
    return model.offset if isinstance(model, OffsetSphere) else 0.0


def incident_coeffs(k: float, rho, n_max: int, shift: float = 0.0) -> np.ndarray:
    """
    u_n^i(rho) = e^{-ikd} i^n (2n+1) j_n(k rho) = e^{-ikd} i^n s_n(k rho) jt_n(k rho),
    s_n(z) = z^n/(2n-1)!!. Shape (n_max + 1,) + rho.shape.
    """
    z = k * np.asarray(rho, dtype=np.float64)
    if np.any(z < 0):
        raise InvalidArgumentError("incident field needs non-negative radii")
    scale = power_over_double_factorial(n_max, z, -1)
    phase = np.exp(-1j * k * shift) * I_POWERS[np.arange(n_max + 1) % 4]
    phase = phase.reshape((-1,) + (1,) * z.ndim)
    return phase * scale * jtilde_table(n_max, z)


class ScattererService:
    def __init__(self) -> None:
        self.table_repository = ScattererTableRepository()

    def build(self, name: str, beta: Optional[float] = None, table: Optional[str] = None) -> ScattererModel:
        """
        Собирает модель рассеивателя по имени из командной строки.
        """
        if name == "sphere":
            return HomogeneousSphere()
        if name == "vacuum":
            return HomogeneousSphere(index=1.0)
        if name == "offset":
            return OffsetSphere()
        if name == "hollowed":
            return HollowedSphere() if beta is None else HollowedSphere(beta=beta)
        if name == "tabulated":
            if table is None:
                raise InvalidArgumentError("tabulated scatterer needs a table file")
            return self.table_repository.load(table)
        raise InvalidArgumentError(f"unknown scatterer {name!r}")

    def node_coeffs(self, model: ScattererModel, nodes: np.ndarray, l_max: int) -> np.ndarray:
        """
        Contrast coefficients at every node, shape nodes.shape + (l_max + 1,).
        """
        flat = np.asarray(nodes).reshape(-1)
        table = np.stack([contrast_coeffs(model, float(rho), l_max) for rho in flat])
        if not np.any(table):
            logger.warning("scatterer {} has no support on the grid", getattr(model, "kind", model))
        return table.reshape(np.shape(nodes) + (l_max + 1,))
