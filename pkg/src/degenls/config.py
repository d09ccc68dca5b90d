"""Run configuration: flat INI-style key = value files with sections.

Grammar (configparser dialect):
  - sections in square brackets: [model], [grid], [solver], [dynamics],
    [spectral], [sweep], [output];
  - one `key = value` per line; `#` or `;` start comments; keys are
    lower_snake_case; floats use '.' decimals; lists are comma-separated.

Every field has a default except the model parameters (d, a, p), which any
single-point subcommand requires; `sweep` reads its own section instead.
Values round-trip losslessly: floats are written with repr precision.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .exceptions import InvalidParameterError
from .model import ModelParams


@dataclass
class RunConfig:
    # model
    d: int = 1
    a: float = 0.0
    p: float = 3.0
    omega: float = 1.0
    # grid (r_max / gamma fall back to the tail-based policy when non-positive)
    n: int = 16384
    r_max: float = 0.0
    grid_gamma: float = 0.0
    # solver
    tol: float = 1e-8
    max_iter: int = 50000
    pohozaev_threshold: float = 1e-6
    shoot: bool = False
    # dynamics
    t_final: float = 10.0
    dt: float = 1e-3
    lambda_scale: float = 1.0
    record_every: int = 1
    # spectral
    l_max: int = 3
    eigenfunctions: bool = False
    # sweep
    sweep_d: int = 1
    sweep_a_values: tuple[float, ...] = (0.0, 0.25, 0.5)
    sweep_p_values: tuple[float, ...] = (2.0, 3.0, 5.0, 7.0)
    sweep_n: int = 65536
    sweep_tail_decades: float = 7.0
    # output
    seed: int = 1234
    out_dir: str = ""

    def params(self) -> ModelParams:
        return ModelParams(self.d, self.a, self.p, self.omega)


_LAYOUT = {
    "model": {"d": int, "a": float, "p": float, "omega": float},
    "grid": {"n": int, "r_max": float, "grid_gamma": float},
    "solver": {"tol": float, "max_iter": int, "pohozaev_threshold": float, "shoot": bool},
    "dynamics": {"t_final": float, "dt": float, "lambda_scale": float, "record_every": int},
    "spectral": {"l_max": int, "eigenfunctions": bool},
    "sweep": {"sweep_d": int, "sweep_a_values": tuple, "sweep_p_values": tuple,
              "sweep_n": int, "sweep_tail_decades": float},
    "output": {"seed": int, "out_dir": str},
}

# Keys are written without the section prefix: [sweep] d, a_values, ...
_KEY_NAMES = {
    "sweep_d": "d", "sweep_a_values": "a_values", "sweep_p_values": "p_values",
    "sweep_n": "n", "sweep_tail_decades": "tail_decades", "grid_gamma": "gamma",
    "out_dir": "dir",
}


def _parse_value(raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise InvalidParameterError(f"expected a boolean, got {raw!r}")
    if kind is tuple:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    return kind(raw)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)
    cfg = RunConfig()
    for section, keys in _LAYOUT.items():
        if not parser.has_section(section):
            continue
        for attr, kind in keys.items():
            key = _KEY_NAMES.get(attr, attr)
            if parser.has_option(section, key):
                setattr(cfg, attr, _parse_value(parser.get(section, key), kind))
        for key in parser.options(section):
            attrs = {_KEY_NAMES.get(a, a): a for a in keys}
            if key not in attrs:
                raise InvalidParameterError(f"unknown key '{key}' in section [{section}]")
    for section in parser.sections():
        if section not in _LAYOUT:
            raise InvalidParameterError(f"unknown section [{section}]")
    return cfg


def save_config(cfg: RunConfig, path: str) -> None:
    lines = []
    for section, keys in _LAYOUT.items():
        lines.append(f"[{section}]")
        for attr in keys:
            key = _KEY_NAMES.get(attr, attr)
            lines.append(f"{key} = {_format_value(getattr(cfg, attr))}")
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
