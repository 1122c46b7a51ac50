"""Flat ``key = value`` experiment configuration.

One pair per line, ``#`` starts a comment. Parsing never stops at the first
problem: every unknown key, bad value and violated constraint is collected
with its line number and reported together.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .core import SimParams, TorusGrid, VelocityGrid, eps0

EXPERIMENTS = ("kinetic", "diffusion", "paired", "sweep", "verify")
POLICIES = ("well-prepared", "micro")


def _float_list(text: str) -> tuple:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(p) for p in items)


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


# key -> (type name, converter)
_FIELDS = {
    "experiment": ("string", str),
    "alpha": ("float", float),
    "A": ("float", float),
    "eps": ("float", float),
    "n": ("integer", _int),
    "nv": ("integer", _int),
    "vmax": ("float", float),
    "beta_rel": ("float", float),
    "dt_cap": ("float", float),
    "t_end": ("float", float),
    "amplitude": ("float", float),
    "mode": ("integer", _int),
    "micro_amplitude": ("float", float),
    "eps_prime_policy": ("string", str),
    "stride": ("integer", _int),
    "snapshot_dt": ("float", float),
    "seed": ("integer", _int),
    "eps_list": ("comma-separated floats", _float_list),
    "t_floor": ("float", float),
    "workers": ("integer", _int),
    "diffusion_dt": ("float", float),
}


@dataclass
class ExperimentConfig:
    experiment: str = "kinetic"
    alpha: float = 0.0
    A: float = 2.0
    eps: float = 0.1
    n: int = 128
    nv: int = 128
    vmax: float = 8.0
    beta_rel: float = 0.5
    dt_cap: float | None = None
    t_end: float = 1.0
    amplitude: float = 0.5
    mode: int = 1
    micro_amplitude: float = 0.0
    eps_prime_policy: str = "well-prepared"
    stride: int = 1
    snapshot_dt: float | None = None
    seed: int = 7
    eps_list: tuple = (0.4, 0.2, 0.1, 0.05, 0.025)
    t_floor: float = 0.25
    workers: int = 1
    diffusion_dt: float | None = None
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    def sim_params(self) -> SimParams:
        return SimParams(alpha=self.alpha, bigA=self.A, eps=self.eps, grid=TorusGrid(self.n),
                         vgrid=VelocityGrid(self.nv, self.vmax), beta_rel=self.beta_rel,
                         dt_cap=self.dt_cap, t_end=self.t_end)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("lines")
        d["eps_list"] = list(self.eps_list)
        return d


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.problems))


def sandwich_amplitude_limit(bigA: float) -> float:
    """Largest ``|a|`` keeping ``1 + a cos`` inside ``[1/A, A]``."""
    return min(bigA - 1.0, 1.0 - 1.0 / bigA)


def _validate(cfg: ExperimentConfig, seen: dict) -> list:
    problems = []

    def bad(key, msg):
        problems.append((seen.get(key, 0), msg))

    if cfg.experiment not in EXPERIMENTS:
        bad("experiment", f"experiment must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
    if cfg.eps_prime_policy not in POLICIES:
        bad("eps_prime_policy", f"eps_prime_policy must be one of {', '.join(POLICIES)}")
    a_ok = cfg.A > 1.0
    if not a_ok:
        bad("A", f"A must exceed 1 (the Maxwellian bounds [M/A, A M] need A > 1), got {cfg.A:g}")
    if not cfg.eps > 0:
        bad("eps", f"eps must be positive, got {cfg.eps:g}")
    if not cfg.t_end > 0:
        bad("t_end", f"t_end must be positive, got {cfg.t_end:g}")
    if cfg.n < 8:
        bad("n", f"n must be at least 8, got {cfg.n}")
    if cfg.nv < 2 or cfg.nv % 2:
        bad("nv", f"nv must be a positive even integer, got {cfg.nv}")
    if cfg.vmax < 6.0:
        bad("vmax", f"vmax must be >= 6, got {cfg.vmax:g}")
    if not cfg.beta_rel > 0:
        bad("beta_rel", f"beta_rel must be positive, got {cfg.beta_rel:g}")
    if cfg.dt_cap is not None and not cfg.dt_cap > 0:
        bad("dt_cap", f"dt_cap must be positive, got {cfg.dt_cap:g}")
    if cfg.snapshot_dt is not None and not cfg.snapshot_dt > 0:
        bad("snapshot_dt", f"snapshot_dt must be positive, got {cfg.snapshot_dt:g}")
    if cfg.diffusion_dt is not None and not cfg.diffusion_dt > 0:
        bad("diffusion_dt", f"diffusion_dt must be positive, got {cfg.diffusion_dt:g}")
    if cfg.stride < 1:
        bad("stride", f"stride must be >= 1, got {cfg.stride}")
    if cfg.mode < 1:
        bad("mode", f"mode must be >= 1, got {cfg.mode}")
    if cfg.workers < 1:
        bad("workers", f"workers must be >= 1, got {cfg.workers}")
    if cfg.micro_amplitude < 0:
        bad("micro_amplitude", f"micro_amplitude must be nonnegative, got {cfg.micro_amplitude:g}")
    if not cfg.t_floor > 0:
        bad("t_floor", f"t_floor must be positive, got {cfg.t_floor:g}")
    if a_ok:
        limit = sandwich_amplitude_limit(cfg.A)
        if abs(cfg.amplitude) > limit:
            bad("amplitude", f"sandwich violated: |amplitude| = {abs(cfg.amplitude):g} exceeds "
                             f"min(A - 1, 1 - 1/A) = {limit:.6g} for A = {cfg.A:g}")
        cap = min(eps0(cfg.alpha, cfg.A), 0.5)
        el = cfg.eps_list
        if any(b >= a for a, b in zip(el, el[1:])):
            bad("eps_list", "eps_list must be strictly decreasing")
        if any(not 0 < e < cap for e in el):
            bad("eps_list", f"eps_list values must lie in (0, {cap:.6g})")
    return problems


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    problems = []
    values = {}
    seen = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((ln, f"expected 'key = value', got {raw.strip()!r}"))
            continue
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in _FIELDS:
            problems.append((ln, f"unknown key {key!r}"))
            continue
        if key in seen:
            problems.append((ln, f"duplicate key {key!r} (first set on line {seen[key]})"))
            continue
        seen[key] = ln
        kind, conv = _FIELDS[key]
        if not val:
            problems.append((ln, f"{key}: missing value"))
            continue
        try:
            values[key] = conv(val)
        except ValueError:
            problems.append((ln, f"{key}: expected {kind}, got {val!r}"))
    cfg = ExperimentConfig(**values, lines=seen)
    problems.extend(_validate(cfg, seen))
    if problems:
        raise ConfigError(sorted(problems, key=lambda p: p[0]))
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
