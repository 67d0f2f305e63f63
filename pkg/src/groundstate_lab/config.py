"""Run configuration: a flat INI file with one section per concern.

Example::

    [problem]
    N = 5
    p = 2
    q = pstar
    l = 5
    kind = full

    [sweep]
    lo = 1e-9
    hi = 1e-5
    points_per_decade = 4

Keys are validated against a fixed schema; unknown sections or keys are
rejected.  ``q = pstar`` selects the critical exponent exactly.  Any key can
be overridden with ``section.key=value``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import default_eps_grid
from .core_model import EquationKind, ParameterError, ProblemParams, p_star
from .shooting import IntegratorConfig

__all__ = ["ConfigError", "RunConfig", "SCHEMA"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _opt(conv):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return conv(text)

    parse.__name__ = f"optional_{conv.__name__}"
    return parse


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _exponent(text):
    """A float, or the literal ``pstar`` (resolved once ``N, p`` are known)."""
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    if str(text).strip().lower() == "pstar":
        return "pstar"
    return float(text)


def _kind(text) -> str:
    return EquationKind(str(text).strip().lower()).value


SCHEMA: dict[str, dict[str, tuple]] = {
    "problem": {
        "N": (_int, 3),
        "p": (float, 2.0),
        "q": (_exponent, None),
        "l": (_exponent, None),
        "kind": (_kind, "full"),
        "eps": (_opt(float), None),
    },
    "sweep": {
        "lo": (_opt(float), None),
        "hi": (_opt(float), None),
        "points_per_decade": (_int, 8),
    },
    "integrator": {
        "rel_tol": (float, 1e-12),
        "abs_tol": (float, 1e-14),
        "bisection_tol": (float, 1e-11),
        "max_bisections": (_int, 200),
        "max_steps": (_int, 400_000),
        "scan_points": (_int, 24),
        "r_start": (_opt(float), None),
        "r_max": (_opt(float), None),
    },
    "output": {
        "dir": (str, "groundstate_lab_out"),
        "emit_plot_data": (_bool, False),
    },
    "fit": {
        "table": (_opt(str), None),
        "column": (str, "a"),
        "fixed_log_power": (_opt(float), None),
        "window_lo": (_opt(float), None),
        "window_hi": (_opt(float), None),
        "tolerance": (_opt(float), None),
    },
    "verify": {
        "gamma": (_opt(float), None),
    },
}


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class RunConfig:
    """Validated configuration values, ``values[section][key]``."""

    values: dict = field(default_factory=dict)

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
        cp.optionxform = str  # keep key case (N vs n)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        cfg = cls.defaults()
        for sec in cp.sections():
            for key, raw in cp.items(sec):
                cfg.set(sec, key, raw)
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        return cls.from_text(text)

    def set(self, section: str, key: str, raw) -> None:
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        conv = SCHEMA[section][key][0]
        try:
            self.values[section][key] = conv(raw) if isinstance(raw, str) else conv(_fmt(raw))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from exc

    def override(self, assignment: str) -> None:
        """Apply ``section.key=value``."""
        if "=" not in assignment:
            raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
        lhs, raw = assignment.split("=", 1)
        if "." not in lhs:
            raise ConfigError(f"override key must be section.key, got {lhs!r}")
        section, key = lhs.strip().split(".", 1)
        self.set(section, key, raw.strip())

    def get(self, section: str, key: str):
        return self.values[section][key]

    # ------------------------------------------------------------ derived

    def to_text(self) -> str:
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for key in keys:
                lines.append(f"{key} = {_fmt(self.values[sec][key])}")
            lines.append("")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {s: dict(v) for s, v in self.values.items()}

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=_fmt).encode()
        return hashlib.sha256(blob).hexdigest()

    @property
    def kind(self) -> EquationKind:
        return EquationKind(self.values["problem"]["kind"])

    def problem_params(self) -> ProblemParams:
        pr = self.values["problem"]
        N, p = pr["N"], pr["p"]
        try:
            ps = p_star(N, p)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        q, l = pr["q"], pr["l"]
        if self.kind is EquationKind.EMDEN_FOWLER:
            q = ps if q is None else q
            l = (ps if q == "pstar" else q) + 1.0 if l is None else l
        if q is None or l is None:
            raise ConfigError("problem.q and problem.l are required for this equation kind")
        q = ps if q == "pstar" else q
        l = ps if l == "pstar" else l
        eps = pr["eps"]
        try:
            return ProblemParams(N, p, q, l, 0.0 if eps is None else eps)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def integrator_config(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(**self.values["integrator"])
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def eps_grid(self) -> np.ndarray:
        sw = self.values["sweep"]
        try:
            return default_eps_grid(self.problem_params(), sw["points_per_decade"], sw["lo"], sw["hi"])
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def fit_window(self):
        f = self.values["fit"]
        if f["window_lo"] is None and f["window_hi"] is None:
            return None
        lo = 0.0 if f["window_lo"] is None else f["window_lo"]
        hi = math.inf if f["window_hi"] is None else f["window_hi"]
        return (lo, hi)
