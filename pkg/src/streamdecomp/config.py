"""Experiment configuration: built-in profiles overlaid by a versioned YAML file.

File layout (every key optional except ``version``)::

    version: 1
    profile: desk            # or paper
    output_dir: out
    data:
      n: 128
      r: 3
      d: 40
      q: 20
      s0: [8, 16, 24, 32]
      m: [32, 51, 77]
      trials: 20
      master_seed: 0
    solver:
      lam: null              # null -> C / sqrt(n)
      mu_bar: 0.001
      mu0: null              # null -> derived from the first gradient
      epsilon_mu: 0.8
      epsilon_weights: 0.8
      C: 7
      J: 3
      max_iter: 2000
      tol: 1.0e-6
      cluster_stride: 1

Unknown keys are rejected.  The solver's column budget ``d`` always follows
``data.d``.
"""

from dataclasses import asdict, dataclass, fields, replace

import yaml

from .errors import InvalidInputError
from .solver import SolverConfig

SCHEMA_VERSION = 1


def _ratios_to_m(n, ratios):
    return [int(round(f * n)) for f in ratios]


PROFILES = {
    "desk": dict(n=128, r=3, d=40, q=20, s0=[8, 16, 24, 32],
                 m=_ratios_to_m(128, (0.25, 0.4, 0.6)), trials=20, master_seed=0),
    "paper": dict(n=500, r=5, d=100, q=100, s0=[10, 30, 50, 70, 90, 110],
                  m=_ratios_to_m(500, [k / 10 for k in range(1, 11)]), trials=50, master_seed=0),
}

_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"d", "seed", "check_invariants"}
_TOP_KEYS = {"version", "profile", "output_dir", "data", "solver"}


@dataclass(frozen=True)
class DataConfig:
    n: int
    r: int
    d: int
    q: int
    s0: list
    m: list
    trials: int
    master_seed: int

    def validate(self):
        for name in ("n", "r", "d", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidInputError(f"data.{name} must be a positive integer, got {v!r}")
        if not isinstance(self.q, int) or self.q < 0:
            raise InvalidInputError(f"data.q must be a nonnegative integer, got {self.q!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise InvalidInputError(f"data.master_seed must be a nonnegative integer, got {self.master_seed!r}")
        for name in ("s0", "m"):
            v = getattr(self, name)
            if not isinstance(v, list) or not v or not all(isinstance(e, int) and e > 0 for e in v):
                raise InvalidInputError(f"data.{name} must be a nonempty list of positive integers, got {v!r}")
            if len(set(v)) != len(v):
                raise InvalidInputError(f"data.{name} contains duplicates: {v!r}")
        if any(e % 2 for e in self.s0):
            raise InvalidInputError(f"data.s0 values must be even, got {self.s0!r}")
        if any(e > self.n for e in self.m):
            raise InvalidInputError(f"data.m values must not exceed n={self.n}, got {self.m!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    profile: str
    data: DataConfig
    solver: SolverConfig
    output_dir: str


def _expect_mapping(obj, where):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{where} must be a mapping, got {type(obj).__name__}")
    return obj


def _reject_unknown(mapping, allowed, where):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise InvalidInputError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")


def load_config(path=None, profile=None, seed=None, output_dir=None):
    """Build an :class:`ExperimentConfig`; explicit arguments override the file."""
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise InvalidInputError(f"cannot read config {path}: {exc.strerror}") from exc
        except yaml.YAMLError as exc:
            raise InvalidInputError(f"config {path} is not valid YAML: {exc}") from exc
        raw = _expect_mapping(raw, "config")
        _reject_unknown(raw, _TOP_KEYS, "config")
        if raw.get("version") != SCHEMA_VERSION:
            raise InvalidInputError(
                f"config version must be {SCHEMA_VERSION}, got {raw.get('version')!r}"
            )
    prof = profile or raw.get("profile") or "desk"
    if prof not in PROFILES:
        raise InvalidInputError(f"unknown profile {prof!r}; choose from {sorted(PROFILES)}")

    data_raw = _expect_mapping(raw.get("data"), "data")
    _reject_unknown(data_raw, set(PROFILES[prof]), "data")
    data = DataConfig(**{**PROFILES[prof], **data_raw})
    if seed is not None:
        data = replace(data, master_seed=int(seed))
    data.validate()

    solver_raw = _expect_mapping(raw.get("solver"), "solver")
    _reject_unknown(solver_raw, _SOLVER_KEYS, "solver")
    try:
        solver = SolverConfig(**solver_raw, d=data.d, seed=data.master_seed)
    except TypeError as exc:
        raise InvalidInputError(f"bad solver settings: {exc}") from exc

    out = output_dir or raw.get("output_dir") or "out"
    return ExperimentConfig(prof, data, solver, str(out))


def dump_config(cfg):
    """YAML text that reloads to ``cfg``."""
    solver = {k: v for k, v in asdict(cfg.solver).items() if k in _SOLVER_KEYS}
    doc = dict(version=SCHEMA_VERSION, profile=cfg.profile, output_dir=cfg.output_dir,
               data=asdict(cfg.data), solver=solver)
    return yaml.safe_dump(doc, sort_keys=False)
