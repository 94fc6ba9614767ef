import re
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

import numpy as np
from loguru import logger

from persistent.model.scatterer import TabulatedScatterer
from utils.errors import InvalidArgumentError

_SEPARATOR = re.compile(r"[,\s]+")


class ScattererTableRepository:
    """
    Text tables with rows "rho, l, Re(m_l), Im(m_l)"; commas or whitespace separate
    fields and '#' starts a comment.
    """

    def load(self, path: str) -> TabulatedScatterer:
        rows: Dict[float, Dict[int, complex]] = defaultdict(dict)
        l_max = 0
        for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [f for f in _SEPARATOR.split(line) if f]
            if len(fields) != 4:
                raise InvalidArgumentError(f"{path}:{number}: expected 4 fields, got {len(fields)}")
            try:
                rho, l, re_part, im_part = float(fields[0]), int(fields[1]), float(fields[2]), float(fields[3])
            except ValueError as e:
                raise InvalidArgumentError(f"{path}:{number}: {e}") from e
            if rho < 0 or l < 0:
                raise InvalidArgumentError(f"{path}:{number}: negative radius or order")
            rows[rho][l] = complex(re_part, im_part)
            l_max = max(l_max, l)
        if not rows:
            raise InvalidArgumentError(f"{path}: no coefficient rows")
        radii = np.array(sorted(rows))
        coeffs = np.zeros((radii.size, l_max + 1), dtype=np.complex128)
        for i, rho in enumerate(radii):
            for l, value in rows[rho].items():
                coeffs[i, l] = value
        logger.info("scatterer table loaded path={} radii={} l_max={}", path, radii.size, l_max)
        return TabulatedScatterer(radii=radii, coeffs=coeffs)

    def save(self, path: str, model: TabulatedScatterer) -> None:
        lines: List[str] = ["# rho, l, re, im"]
        for rho, row in zip(model.radii, model.coeffs):
            for l, value in enumerate(row):
                lines.append(f"{float(rho)!r}, {l}, {float(value.real)!r}, {float(value.imag)!r}")
        Path(path).write_text("\n".join(lines) + "\n")
