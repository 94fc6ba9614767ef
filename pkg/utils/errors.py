from typing import List, Optional, Tuple

import numpy as np


class InvalidArgumentError(ValueError):
    """
    Аргумент вне допустимой области (размеры, знаки, несогласованные таблицы).
    """


class QuadratureConvergenceError(RuntimeError):
    def __init__(self, index: Tuple[int, int, int, int], difference: float, points: int) -> None:
        self.index = index
        self.difference = difference
        self.points = points
        j, k, n, m = index
        super().__init__(
            f"moment (j={j}, k={k}, n={n}, m={m}) not converged with {points} points per panel, "
            f"last difference {difference:.3e}"
        )


class GmresConvergenceError(RuntimeError):
    def __init__(
        self,
        best_solution: np.ndarray,
        residual: float,
        iterations: int,
        history: Optional[List[float]] = None,
    ) -> None:
        self.best_solution = best_solution
        self.residual = residual
        self.iterations = iterations
        self.history = history or []
        super().__init__(
            f"GMRES did not reach tolerance after {iterations} iterations, relative residual {residual:.3e}"
        )


class MieResonanceError(ArithmeticError):
    def __init__(self, n: int) -> None:
        self.n = n
        super().__init__(f"singular interface system for mode n={n}")


class MomentCacheError(IOError):
    """
    Файл кэша моментов не читается или не совпадает с ожидаемым заголовком.
    """
