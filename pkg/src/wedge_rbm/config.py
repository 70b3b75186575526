"""Flat key=value experiment configuration.

The parameter space is small, so a flat text format keeps manifests and
diffs readable: one ``key = value`` per line, '#' comments, unknown keys
rejected with a suggestion.  A manifest written by the CLI is itself a valid
config file, which is what makes reruns bit-reproducible.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field, fields

from .errors import ConfigurationError
from .geometry import VertexCone, WedgeConfig, make_wedge
from .simulate import SimParams
from .skorokhod import ToleranceProfile


@dataclass
class ExperimentConfig:
    # geometry
    xi: float = math.pi / 2
    theta1: float = 3 * math.pi / 8
    theta2: float = 3 * math.pi / 8
    # simulation
    z0_x: float = 0.0
    z0_y: float = 0.0
    dt: float = 1e-4
    t_end: float = 1.0
    seed: int = 20250810
    n_paths: int = 100
    # analysis
    eps_zero: float | None = None        # None -> 5 * sqrt(dt)
    delta0: float = 0.09
    delta_ratio: float = 3.0
    delta_levels: int = 4
    p_list: tuple[float, ...] = (1.2, 1.8)
    q: float = 0.85
    s0: float = 1e-3
    hill_fraction: float = 0.1
    # checker
    vertex_cone: str = "bisector"
    band: float = 1e-9
    tol_additivity: float = 1e-9
    tol_containment: float = 1e-9
    tol_monotonicity: float = 1e-9
    tol_offboundary_frac: float = 0.05
    tol_direction_deg: float = 2.0
    tol_hull: float = 1e-9
    spike_threshold: float = 1.0
    # output
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "jsonl")
    figures: bool = True

    def validate(self) -> None:
        if not (0.0 < self.xi < 2 * math.pi):
            raise ConfigurationError(f"xi out of range (0, 2*pi): xi = {self.xi}")
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not abs(v) < math.pi / 2:
                raise ConfigurationError(f"{name} out of range (-pi/2, pi/2): {name} = {v}")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0: dt = {self.dt}")
        if self.t_end <= self.dt:
            raise ConfigurationError(f"t_end must exceed dt: t_end = {self.t_end}")
        if self.n_paths < 1:
            raise ConfigurationError(f"n_paths must be >= 1: n_paths = {self.n_paths}")
        if self.eps_zero is not None and self.eps_zero <= 0:
            raise ConfigurationError(f"eps_zero must be > 0 or auto: eps_zero = {self.eps_zero}")
        if self.delta0 <= 0:
            raise ConfigurationError(f"delta0 must be > 0: delta0 = {self.delta0}")
        if self.delta_ratio <= 2.0:
            raise ConfigurationError(
                f"delta_ratio must exceed 2: delta_ratio = {self.delta_ratio}")
        if self.delta_levels < 3:
            raise ConfigurationError(
                f"delta_levels must be >= 3: delta_levels = {self.delta_levels}")
        if not (0.0 < self.q < 1.0):
            raise ConfigurationError(f"q must lie in (0, 1): q = {self.q}")
        if any(p < 1.0 for p in self.p_list):
            raise ConfigurationError(f"p_list entries must be >= 1: p_list = {self.p_list}")
        if self.s0 <= 0:
            raise ConfigurationError(f"s0 must be > 0: s0 = {self.s0}")
        if not (0.0 < self.hill_fraction < 1.0):
            raise ConfigurationError(
                f"hill_fraction must lie in (0, 1): hill_fraction = {self.hill_fraction}")
        if self.band < 0:
            raise ConfigurationError(f"band must be >= 0: band = {self.band}")
        kind = self.vertex_cone.split(":", 1)[0]
        if kind not in ("bisector", "zero", "full-plane", "ray"):
            raise ConfigurationError(
                f"vertex_cone must be bisector, zero, full-plane or ray:<radians>: "
                f"vertex_cone = {self.vertex_cone}")

    # -- derived objects -------------------------------------------------

    def wedge(self) -> WedgeConfig:
        return make_wedge(self.xi, self.theta1, self.theta2)

    def vertex_cone_obj(self, cfg: WedgeConfig | None = None) -> VertexCone:
        cfg = cfg or self.wedge()
        if self.vertex_cone == "bisector":
            return VertexCone.bisector(cfg)
        if self.vertex_cone == "zero":
            return VertexCone.zero()
        if self.vertex_cone == "full-plane":
            return VertexCone.full_plane()
        return VertexCone.ray(float(self.vertex_cone.split(":", 1)[1]))

    def sim_params(self) -> SimParams:
        return SimParams(z0=(self.z0_x, self.z0_y), dt=self.dt, t_end=self.t_end,
                         seed=self.seed, vertex_cone=self.vertex_cone_obj())

    @property
    def eps(self) -> float:
        return self.eps_zero if self.eps_zero is not None else 5.0 * math.sqrt(self.dt)

    def tolerances(self) -> ToleranceProfile:
        return ToleranceProfile(additivity=self.tol_additivity,
                                containment=self.tol_containment,
                                monotonicity=self.tol_monotonicity,
                                offboundary_frac=self.tol_offboundary_frac,
                                direction_deg=self.tol_direction_deg,
                                hull_distance=self.tol_hull,
                                spike=self.spike_threshold)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "eps_zero" and v is None:
                v = "auto"
            elif f.name in ("p_list", "formats"):
                v = ", ".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _parse_value(name: str, raw: str, lineno: int):
    raw = raw.strip()
    try:
        if name == "eps_zero":
            return None if raw.lower() in ("auto", "none") else float(raw)
        if name == "p_list":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        if name == "formats":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if name == "figures":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw}")
        if name in ("seed", "n_paths", "delta_levels"):
            return int(raw)
        if name in ("vertex_cone", "out_dir"):
            return raw
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"line {lineno}: cannot parse {name} = {raw!r}: {exc}")


def load_config(path) -> ExperimentConfig:
    """Parse and validate a flat key=value config file."""
    config = ExperimentConfig()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigurationError(f"line {lineno}: expected 'key = value', "
                                         f"got {stripped!r}")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in _FIELDS:
                hint = difflib.get_close_matches(key, _FIELDS, n=1)
                extra = f"; did you mean {hint[0]!r}?" if hint else ""
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}{extra}")
            setattr(config, key, _parse_value(key, raw, lineno))
    config.validate()
    return config
