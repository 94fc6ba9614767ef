from typing import Callable, List, Optional

import numpy as np
from loguru import logger
from scipy.linalg import solve_triangular

from persistent.model.solver import GmresResult
from utils.errors import GmresConvergenceError, InvalidArgumentError


def _givens(a: complex, b: complex):
    """
    c, s with [c, s; -conj(s), c] [a; b] = [r; 0], c real.
    """
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    norm = np.hypot(abs(a), abs(b))
    c = abs(a) / norm
    s = (a / abs(a)) * np.conj(b) / norm
    return c, s


def gmres_solve(
    apply: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    tol: float,
    max_iters: int,
    restart: int,
    x0: Optional[np.ndarray] = None,
) -> GmresResult:
    """
    Restarted GMRES for a complex linear map given as a function on flat vectors.

    Arnoldi uses modified Gram-Schmidt with one reorthogonalisation pass; the least
    squares problem is updated with Givens rotations. Convergence is measured by the
    relative residual ||b - Ax|| / ||b||, recorded after every inner iteration.
    """
    if tol <= 0 or max_iters < 1 or restart < 1:
        raise InvalidArgumentError("GMRES needs tol > 0, max_iters >= 1, restart >= 1")
    b = np.asarray(rhs, dtype=np.complex128).reshape(-1)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.complex128).reshape(-1)
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return GmresResult(solution=np.zeros_like(b), iterations=0, residual=0.0, history=[0.0])

    r = b - apply(x)
    residual = np.linalg.norm(r) / b_norm
    history: List[float] = [float(residual)]
    if residual <= tol:
        logger.info("gmres converged at start residual={:.3e}", residual)
        return GmresResult(solution=x, iterations=0, residual=float(residual), history=history)

    iterations = 0
    best_x, best_residual = x, residual
    while iterations < max_iters:
        beta = np.linalg.norm(r)
        m = min(restart, max_iters - iterations)
        basis = np.zeros((m + 1, b.size), dtype=np.complex128)
        hessenberg = np.zeros((m + 1, m), dtype=np.complex128)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=np.complex128)
        g = np.zeros(m + 1, dtype=np.complex128)
        g[0] = beta
        basis[0] = r / beta
        steps = 0
        for j in range(m):
            w = apply(basis[j])
            for _ in range(2):
                for i in range(j + 1):
                    h = np.vdot(basis[i], w)
                    hessenberg[i, j] += h
                    w = w - h * basis[i]
            h_next = np.linalg.norm(w)
            hessenberg[j + 1, j] = h_next
            for i in range(j):
                upper = cs[i] * hessenberg[i, j] + sn[i] * hessenberg[i + 1, j]
                lower = -np.conj(sn[i]) * hessenberg[i, j] + cs[i] * hessenberg[i + 1, j]
                hessenberg[i, j], hessenberg[i + 1, j] = upper, lower
            cs[j], sn[j] = _givens(hessenberg[j, j], hessenberg[j + 1, j])
            hessenberg[j, j] = cs[j] * hessenberg[j, j] + sn[j] * hessenberg[j + 1, j]
            hessenberg[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            steps = j + 1
            iterations += 1
            residual = abs(g[j + 1]) / b_norm
            history.append(float(residual))
            logger.debug("gmres iteration={} residual={:.3e}", iterations, residual)
            if residual <= tol or h_next == 0:
                break
            basis[j + 1] = w / h_next

        y = solve_triangular(hessenberg[:steps, :steps], g[:steps])
        x = x + basis[:steps].T @ y
        r = b - apply(x)
        residual = np.linalg.norm(r) / b_norm
        if residual < best_residual:
            best_x, best_residual = x, residual
        if residual <= tol:
            logger.info("gmres converged iterations={} residual={:.3e}", iterations, residual)
            return GmresResult(solution=x, iterations=iterations, residual=float(residual), history=history)

    logger.warning("gmres stopped iterations={} residual={:.3e}", iterations, best_residual)
    raise GmresConvergenceError(best_x, float(best_residual), iterations, history)
