from typing import Optional

from loguru import logger
from pydantic import BaseModel
from pydantic_settings import BaseSettings, SettingsConfigDict


class Solver(BaseModel):
    F: int = 255
    n_i: int = 32
    n_d: int = 4
    k: float = 1.0
    r_max: float = 4.0
    tol: float = 1e-10
    max_iters: int = 500
    restart: int = 50


class Flt(BaseModel):
    extended_precision: bool = True


class Moments(BaseModel):
    rtol: float = 1e-13
    start_points: int = 17
    max_points: int = 257
    cache_dir: Optional[str] = None
    memory_tables: int = 4


class Bessel(BaseModel):
    series_terms: int = 30
    start_margin: int = 16


class Runtime(BaseModel):
    threads: int = 1


class Study(BaseModel):
    angular_reference_f: int = 1023
    gauss_angles: int = 17


class _Settings(BaseSettings):
    solver: Solver = Solver()
    flt: Flt = Flt()
    moments: Moments = Moments()
    bessel: Bessel = Bessel()
    runtime: Runtime = Runtime()
    study: Study = Study()

    model_config = SettingsConfigDict(
        env_prefix="axiscat_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )


settings = _Settings()
logger.info("settings.inited {}", settings.model_dump_json())
