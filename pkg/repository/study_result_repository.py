"""
CSV outputs of the studies.

Every file starts with '#' comment lines: the command line that reproduces it,
then one "key=value" line per parameter. The table follows with a header row;
floats are written with the shortest decimal that reads back to the same double.
"""
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from persistent.model.radial import ModalField, RadialGrid
from utils.errors import InvalidArgumentError

COMMAND_PREFIX = "# command: "


def _comment_lines(params: Mapping[str, Any], command: Optional[str], notes: Iterable[str]) -> List[str]:
    lines = []
    if command:
        lines.append(f"{COMMAND_PREFIX}{command}")
    for key, value in params.items():
        lines.append(f"# {key}={value}")
    lines.extend(f"# {note}" for note in notes)
    return lines


def _write(path: str, frame: pd.DataFrame, lines: List[str]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        for line in lines:
            handle.write(line + "\n")
        frame.to_csv(handle, index=False, lineterminator="\n")
    return target


class StudyResultRepository:
    def write_rows(
        self,
        path: str,
        rows: Sequence[BaseModel],
        params: Mapping[str, Any],
        command: Optional[str] = None,
        notes: Iterable[str] = (),
    ) -> Path:
        if not rows:
            raise InvalidArgumentError("no rows to write")
        records = [row.model_dump() for row in rows]
        frame = pd.DataFrame(records, columns=list(type(rows[0]).model_fields))
        for column in frame.columns:
            present = [r[column] for r in records if r[column] is not None]
            if present and all(isinstance(v, int) and not isinstance(v, bool) for v in present):
                frame[column] = frame[column].astype("Int64")
        target = _write(path, frame, _comment_lines(params, command, notes))
        logger.info("study table written path={} rows={}", target, len(rows))
        return target

    def read_header(self, path: str) -> Tuple[Optional[str], Dict[str, str]]:
        """
        The echoed command line and parameters of a written file.
        """
        command, params = None, {}
        with Path(path).open() as handle:
            for line in handle:
                if not line.startswith("#"):
                    break
                line = line.rstrip("\n")
                if line.startswith(COMMAND_PREFIX):
                    command = line[len(COMMAND_PREFIX):]
                elif "=" in line:
                    key, value = line[1:].strip().split("=", 1)
                    params[key] = value
        return command, params

    def read_rows(self, path: str) -> pd.DataFrame:
        return pd.read_csv(path, comment="#", float_precision="round_trip")

    def write_modal(
        self,
        path: str,
        grid: RadialGrid,
        field: ModalField,
        params: Mapping[str, Any],
        command: Optional[str] = None,
    ) -> Path:
        """
        Пишет коэффициенты u_n(rho) по узлам сетки: строки rho, n, re, im.
        """
        if field.shape[:2] != (grid.n_i, grid.n_d):
            raise InvalidArgumentError(f"field of shape {field.shape} does not match the grid")
        modes = field.F + 1
        values = field.flat()
        frame = pd.DataFrame(
            {
                "rho": np.repeat(grid.flat_nodes, modes),
                "n": np.tile(np.arange(modes), grid.node_count),
                "re": values.real,
                "im": values.imag,
            }
        )
        echo = dict(params)
        echo.update(r_max=repr(float(grid.r_max)), n_i=grid.n_i, n_d=grid.n_d, F=field.F)
        target = _write(path, frame, _comment_lines(echo, command, ()))
        logger.info("modal coefficients written path={} nodes={} modes={}", target, grid.node_count, modes)
        return target

    def read_modal(self, path: str) -> Tuple[Dict[str, str], ModalField]:
        _, params = self.read_header(path)
        try:
            n_i, n_d, F = int(params["n_i"]), int(params["n_d"]), int(params["F"])
        except KeyError as e:
            raise InvalidArgumentError(f"{path}: missing parameter {e}") from e
        frame = self.read_rows(path)
        if len(frame) != n_i * n_d * (F + 1):
            raise InvalidArgumentError(f"{path}: {len(frame)} rows, expected {n_i * n_d * (F + 1)}")
        values = frame["re"].to_numpy(dtype=np.float64) + 1j * frame["im"].to_numpy(dtype=np.float64)
        return params, ModalField(values=values.reshape(n_i, n_d, F + 1))

    def write_raster(
        self,
        path: str,
        rho: np.ndarray,
        theta: np.ndarray,
        values: np.ndarray,
        params: Mapping[str, Any],
        command: Optional[str] = None,
    ) -> Path:
        """
        values[i, j] is the field at (rho[i], theta[j]).
        """
        rr, tt = np.meshgrid(rho, theta, indexing="ij")
        frame = pd.DataFrame(
            {
                "rho": rr.reshape(-1),
                "theta": tt.reshape(-1),
                "re": values.real.reshape(-1),
                "im": values.imag.reshape(-1),
            }
        )
        target = _write(path, frame, _comment_lines(params, command, ()))
        logger.info("raster written path={} points={}", target, rr.size)
        return target
