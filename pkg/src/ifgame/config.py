"""Experiment configuration: a flat JSON key-value tree.

The exact grammar is documented in the README (section "Configuration
reference").  Unknown keys are rejected, missing required keys and
out-of-range values raise ConfigError naming the offending field, and a
loaded config serializes back to the identical normalized document.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .game import GainAlphabets, GameSpec, LinkDistribution
from .pareto import AlConfig

SOLVER_CHOICES = ("iwf", "vi", "pareto", "all")
FORMAT_CHOICES = ("csv", "json")

DEFAULT_SWEEP_VALUES = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class GameConfig:
    players: int
    direct_gains: list[float]
    cross_gains: list[float]
    pbar: list[float]
    link_probs: str | dict = "uniform"
    alpha: list[float] | None = None
    weights: list[float] | None = None

    def build_spec(self) -> GameSpec:
        gains = GainAlphabets(direct=np.array(self.direct_gains),
                              cross=np.array(self.cross_gains))
        if self.link_probs == "uniform":
            dists = LinkDistribution.uniform(self.players, gains.direct.size,
                                             gains.cross.size)
        else:
            dists = LinkDistribution(direct=np.array(self.link_probs["direct"]),
                                     cross=np.array(self.link_probs["cross"]))
        return GameSpec(n_players=self.players, gains=gains, dists=dists,
                        pbar=np.array(self.pbar),
                        alpha=None if self.alpha is None else np.array(self.alpha),
                        weights=None if self.weights is None else np.array(self.weights))


@dataclass(frozen=True)
class IwfConfig:
    scheme: str = "simultaneous"
    tol: float = 1e-8
    max_iter: int = 500


@dataclass(frozen=True)
class ViConfig:
    eps0: float = 1.0
    decay: float = 0.5
    outer_tol: float = 1e-7
    inner_tol: float = 1e-9
    max_outer: int = 60
    max_inner: int = 200_000


@dataclass(frozen=True)
class SolverConfig:
    which: str = "all"
    state_cap: int = 100_000
    iwf: IwfConfig = field(default_factory=IwfConfig)
    vi: ViConfig = field(default_factory=ViConfig)
    pareto: AlConfig = field(default_factory=AlConfig)


@dataclass(frozen=True)
class SweepConfig:
    parameter: str = "pbar"
    values: list[float] = field(default_factory=lambda: list(DEFAULT_SWEEP_VALUES))


@dataclass(frozen=True)
class SimulateConfig:
    slots: int = 1_000_000
    seed: int = 7


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    pareto_trajectories: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    game: GameConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig | None = None
    simulate: SimulateConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.sweep is None:
            doc.pop("sweep")
        if self.simulate is None:
            doc.pop("simulate")
        return doc


def serialize_config(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def _require_keys(node, allowed, required, where):
    if not isinstance(node, dict):
        raise ConfigError(f"{where} must be an object", field=where)
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}", field=f"{where}.{key}")
    for key in sorted(required):  # deterministic first-reported field
        if key not in node:
            raise ConfigError(f"missing required key {key!r} in {where}",
                              field=f"{where}.{key}")


def _vector(node, key, n, where, default=None, positive=True):
    if key not in node or node[key] is None:
        return default
    raw = node[key]
    values = [float(raw)] * n if isinstance(raw, (int, float)) else [float(v) for v in raw]
    if len(values) != n:
        raise ConfigError(f"{where}.{key} must have {n} entries", field=f"{where}.{key}")
    if positive and any(v <= 0 for v in values):
        raise ConfigError(f"{where}.{key} entries must be positive", field=f"{where}.{key}")
    return values


def _scalar(node, key, where, cast, default, low=None, high=None):
    if key not in node:
        return default
    try:
        value = cast(node[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: {exc}", field=f"{where}.{key}") from None
    if low is not None and value <= low:
        raise ConfigError(f"{where}.{key} must be > {low}", field=f"{where}.{key}")
    if high is not None and value >= high:
        raise ConfigError(f"{where}.{key} must be < {high}", field=f"{where}.{key}")
    return value


def _parse_game(node) -> GameConfig:
    _require_keys(node, {"players", "direct_gains", "cross_gains", "link_probs",
                         "pbar", "alpha", "weights"},
                  {"players", "direct_gains", "cross_gains", "pbar"}, "game")
    players = _scalar(node, "players", "game", int, None, low=0)
    for key in ("direct_gains", "cross_gains"):
        gains = node[key]
        if not isinstance(gains, list) or not gains:
            raise ConfigError(f"game.{key} must be a non-empty list", field=f"game.{key}")
        if any(float(g) <= 0 for g in gains):
            raise ConfigError(f"game.{key} must be strictly positive gains",
                              field=f"game.{key}")
    link_probs = node.get("link_probs", "uniform")
    if link_probs != "uniform":
        _require_keys(link_probs, {"direct", "cross"}, {"direct", "cross"},
                      "game.link_probs")
    pbar = _vector(node, "pbar", players, "game")
    if pbar is None:
        raise ConfigError("game.pbar must be given", field="game.pbar")
    return GameConfig(
        players=players,
        direct_gains=[float(g) for g in node["direct_gains"]],
        cross_gains=[float(g) for g in node["cross_gains"]],
        pbar=pbar,
        link_probs=link_probs,
        alpha=_vector(node, "alpha", players, "game"),
        weights=_vector(node, "weights", players, "game"),
    )


def _parse_solver(node) -> SolverConfig:
    _require_keys(node, {"which", "state_cap", "iwf", "vi", "pareto"}, set(), "solver")
    which = node.get("which", "all")
    if which not in SOLVER_CHOICES:
        raise ConfigError(f"solver.which must be one of {SOLVER_CHOICES}",
                          field="solver.which")
    iwf_node = node.get("iwf", {})
    _require_keys(iwf_node, {"scheme", "tol", "max_iter"}, set(), "solver.iwf")
    scheme = iwf_node.get("scheme", "simultaneous")
    if scheme not in ("simultaneous", "sequential"):
        raise ConfigError("solver.iwf.scheme must be 'simultaneous' or 'sequential'",
                          field="solver.iwf.scheme")
    iwf = IwfConfig(scheme=scheme,
                    tol=_scalar(iwf_node, "tol", "solver.iwf", float, 1e-8, low=0.0),
                    max_iter=_scalar(iwf_node, "max_iter", "solver.iwf", int, 500, low=0))
    vi_node = node.get("vi", {})
    _require_keys(vi_node, {"eps0", "decay", "outer_tol", "inner_tol",
                            "max_outer", "max_inner"}, set(), "solver.vi")
    vi = ViConfig(
        eps0=_scalar(vi_node, "eps0", "solver.vi", float, 1.0, low=0.0),
        decay=_scalar(vi_node, "decay", "solver.vi", float, 0.5, low=0.0, high=1.0),
        outer_tol=_scalar(vi_node, "outer_tol", "solver.vi", float, 1e-7, low=0.0),
        inner_tol=_scalar(vi_node, "inner_tol", "solver.vi", float, 1e-9, low=0.0),
        max_outer=_scalar(vi_node, "max_outer", "solver.vi", int, 60, low=0),
        max_inner=_scalar(vi_node, "max_inner", "solver.vi", int, 200_000, low=0),
    )
    al_node = node.get("pareto", {})
    _require_keys(al_node, {"c", "alpha_mult", "delta", "eps_grad", "eps_feas",
                            "max_outer", "max_inner", "starts", "seed"},
                  set(), "solver.pareto")
    try:
        pareto = AlConfig(
            c=_scalar(al_node, "c", "solver.pareto", float, 10.0, low=0.0),
            alpha_mult=_scalar(al_node, "alpha_mult", "solver.pareto", float, 10.0, low=0.0),
            delta=_scalar(al_node, "delta", "solver.pareto",
                          lambda v: None if v is None else float(v), None),
            eps_grad=_scalar(al_node, "eps_grad", "solver.pareto", float, 1e-4, low=0.0),
            eps_feas=_scalar(al_node, "eps_feas", "solver.pareto", float, 1e-4, low=0.0),
            max_outer=_scalar(al_node, "max_outer", "solver.pareto", int, 200, low=0),
            max_inner=_scalar(al_node, "max_inner", "solver.pareto", int, 300, low=0),
            starts=_scalar(al_node, "starts", "solver.pareto", int, 10, low=0),
            seed=_scalar(al_node, "seed", "solver.pareto", int, 0),
        )
    except ValueError as exc:
        raise ConfigError(f"solver.pareto: {exc}", field="solver.pareto") from None
    return SolverConfig(which=which,
                        state_cap=_scalar(node, "state_cap", "solver", int,
                                          100_000, low=0),
                        iwf=iwf, vi=vi, pareto=pareto)


def load_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}", field=None) from None
    _require_keys(doc, {"game", "solver", "sweep", "simulate", "output"},
                  {"game"}, "config")
    game = _parse_game(doc["game"])
    solver = _parse_solver(doc.get("solver", {}))
    sweep = None
    if "sweep" in doc and doc["sweep"] is not None:
        node = doc["sweep"]
        _require_keys(node, {"parameter", "values"}, set(), "sweep")
        parameter = node.get("parameter", "pbar")
        if parameter != "pbar":
            raise ConfigError("sweep.parameter: only 'pbar' is supported",
                              field="sweep.parameter")
        values = [float(v) for v in node.get("values", DEFAULT_SWEEP_VALUES)]
        if not values or any(v <= 0 for v in values):
            raise ConfigError("sweep.values must be positive", field="sweep.values")
        sweep = SweepConfig(parameter=parameter, values=values)
    simulate = None
    if "simulate" in doc and doc["simulate"] is not None:
        node = doc["simulate"]
        _require_keys(node, {"slots", "seed"}, set(), "simulate")
        simulate = SimulateConfig(
            slots=_scalar(node, "slots", "simulate", int, 1_000_000, low=0),
            seed=_scalar(node, "seed", "simulate", int, 7))
    out_node = doc.get("output", {})
    _require_keys(out_node, {"dir", "formats", "pareto_trajectories"}, set(), "output")
    formats = out_node.get("formats", ["csv", "json"])
    if not formats or any(f not in FORMAT_CHOICES for f in formats):
        raise ConfigError(f"output.formats entries must be among {FORMAT_CHOICES}",
                          field="output.formats")
    output = OutputConfig(dir=str(out_node.get("dir", "out")),
                          formats=[str(f) for f in formats],
                          pareto_trajectories=bool(out_node.get("pareto_trajectories",
                                                                False)))
    return ExperimentConfig(game=game, solver=solver, sweep=sweep,
                            simulate=simulate, output=output)


def load_config_file(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())
