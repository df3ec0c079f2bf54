"""
Scenario files: a JSON description of the plant, the gain design, the graph
schedule, initial states and simulation and analysis settings.
"""
from __future__ import annotations

import functools
import json
import logging
import math
import pathlib
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import jsonschema
from jsonschema.exceptions import best_match
import numpy as np

from syncindex import constants
from syncindex.exceptions import ScenarioError, SyncIndexError
from syncindex.graph import GraphSignal, WeightProfile, WeightSchedule, WeightSegment
from syncindex.lti import Plant
from syncindex.types import DesignKind

logger = logging.getLogger(__name__)

DATA_DIR = pathlib.Path(__file__).parent / "data"
SCHEMA_PATH = DATA_DIR / "scenario.schema.json"

Matrix = Tuple[Tuple[float, ...], ...]
PathLike = Union[str, pathlib.Path]


def _matrix(value, name: str) -> Matrix:
    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"{name}: expected a numeric matrix ({e})")
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2 or not array.size:
        raise ScenarioError(f"{name}: expected a row-major matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ScenarioError(f"{name}: non-finite entries")
    return tuple(tuple(float(x) for x in row) for row in array)


def _optional_matrix(value, name: str) -> Optional[Matrix]:
    return None if value is None else _matrix(value, name)


def _listed(matrix: Optional[Matrix]):
    return None if matrix is None else [list(row) for row in matrix]


def _require(data: dict, key: str, where: str):
    try:
        return data[key]
    except (KeyError, TypeError):
        raise ScenarioError(f"{where}: missing field '{key}'")


@functools.lru_cache(maxsize=None)
def scenario_validator() -> jsonschema.Draft7Validator:
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    return jsonschema.Draft7Validator(schema)


def validate_schema(data: dict):
    """
    Checks a decoded scenario against the bundled JSON schema.

    :raises ScenarioError: Naming the dotted path of the most relevant violation.
    """
    error = best_match(scenario_validator().iter_errors(data))
    if error is not None:
        where = ".".join(str(part) for part in error.absolute_path) or "scenario"
        raise ScenarioError(f"{where}: {error.message}")


@dataclass(frozen=True)
class PlantConfig:
    A: Matrix
    B: Matrix

    def build(self) -> Plant:
        return Plant(np.array(self.A), np.array(self.B))


@dataclass(frozen=True)
class DesignConfig:
    """
    explicit: K and/or P given. riccati: kappa1 (and Q, identity by default).
    neutral_lyapunov: optional P. algorithm1: T (window) and k_max.
    """
    kind: DesignKind
    K: Optional[Matrix] = None
    P: Optional[Matrix] = None
    Q: Optional[Matrix] = None
    kappa1: Optional[float] = None
    T: Optional[float] = None
    k_max: int = constants.DEFAULT_K_MAX
    method: str = "ratio"

    def to_dict(self) -> dict:
        data = {"kind": self.kind.name}
        for key in ("K", "P", "Q"):
            if getattr(self, key) is not None:
                data[key] = _listed(getattr(self, key))
        if self.kappa1 is not None:
            data["kappa1"] = self.kappa1
        if self.T is not None:
            data["T"] = self.T
        if self.kind == DesignKind.algorithm1:
            data["k_max"] = self.k_max
        if self.method != "ratio":
            data["method"] = self.method
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DesignConfig":
        kind = _require(data, "kind", "design")
        try:
            kind = DesignKind[kind]
        except KeyError:
            raise ScenarioError(
                f"design.kind: unknown design kind '{kind}'. Expected one of {[k.name for k in DesignKind]}"
            )
        config = cls(
            kind=kind,
            K=_optional_matrix(data.get("K"), "design.K"),
            P=_optional_matrix(data.get("P"), "design.P"),
            Q=_optional_matrix(data.get("Q"), "design.Q"),
            kappa1=None if data.get("kappa1") is None else float(data["kappa1"]),
            T=None if data.get("T") is None else float(data["T"]),
            k_max=int(data.get("k_max", constants.DEFAULT_K_MAX)),
            method=data.get("method", "ratio"),
        )
        if kind == DesignKind.explicit and config.K is None and config.P is None:
            raise ScenarioError("design: explicit designs need K or P")
        if kind == DesignKind.riccati and (config.kappa1 is None or config.kappa1 <= 0):
            raise ScenarioError("design.kappa1: riccati designs need a positive kappa1")
        if kind == DesignKind.algorithm1 and config.k_max < 1:
            raise ScenarioError(f"design.k_max: must be at least 1, got {config.k_max}")
        return config


@dataclass(frozen=True)
class InitConfig:
    """
    Either an explicit stacked x0, or uniform draws in [low, high] from a seeded
    64-bit generator.
    """
    x0: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None
    low: float = -50.0
    high: float = 50.0
    generator: str = "PCG64"

    def initial_state(self, size: int) -> np.ndarray:
        if self.x0 is not None:
            return np.array(self.x0)
        bit_generator = getattr(np.random, self.generator)(self.seed)
        return np.random.Generator(bit_generator).uniform(self.low, self.high, size)

    def to_dict(self) -> dict:
        if self.x0 is not None:
            return {"kind": "explicit", "x0": list(self.x0)}
        return {"kind": "uniform", "low": self.low, "high": self.high, "seed": self.seed, "generator": self.generator}

    @classmethod
    def from_dict(cls, data: dict) -> "InitConfig":
        kind = data.get("kind", "explicit" if "x0" in data else "uniform")
        if kind == "explicit":
            x0 = np.asarray(_require(data, "x0", "init"), dtype=float).ravel()
            return cls(x0=tuple(float(x) for x in x0))
        if kind == "uniform":
            seed = data.get("seed")
            if seed is None:
                raise ScenarioError("init.seed: random initial states need a seed")
            generator = data.get("generator", "PCG64")
            if not hasattr(np.random, generator):
                raise ScenarioError(f"init.generator: unknown bit generator '{generator}'")
            low, high = float(data.get("low", -50.0)), float(data.get("high", 50.0))
            if not low < high:
                raise ScenarioError(f"init: empty box [{low}, {high}]")
            return cls(seed=int(seed), low=low, high=high, generator=generator)
        raise ScenarioError(f"init.kind: unknown kind '{kind}'. Expected 'explicit' or 'uniform'")


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    dt: float = constants.DT
    record_every: int = 1

    def to_dict(self) -> dict:
        return {"t_end": self.t_end, "dt": self.dt, "record_every": self.record_every}


@dataclass(frozen=True)
class AnalysisConfig:
    """
    delta and T define joint connectivity and the alpha windows. stride defaults to
    T/10, t_skip to 10 % of the simulated span and horizon to sim.t_end.
    """
    delta: float
    T: float
    stride: Optional[float] = None
    t_skip: Optional[float] = None
    horizon: Optional[float] = None

    def to_dict(self) -> dict:
        data = {"delta": self.delta, "T": self.T}
        for key in ("stride", "t_skip", "horizon"):
            if getattr(self, key) is not None:
                data[key] = getattr(self, key)
        return data


def _graph_from_dict(data: dict) -> GraphSignal:
    n_nodes = int(_require(data, "n_nodes", "graph"))
    default_w_star = data.get("w_star")
    schedules = {}
    for index, edge in enumerate(data.get("edges", [])):
        i, j = int(_require(edge, "i", f"graph.edges[{index}]")), int(_require(edge, "j", f"graph.edges[{index}]"))
        where = f"graph edge ({i}, {j})"
        try:
            segments = [
                WeightSegment(
                    float(_require(segment, "t0", where)),
                    math.inf if segment.get("t1") is None else float(segment["t1"]),
                    WeightProfile.from_dict(_require(segment, "profile", where)),
                )
                for segment in _require(edge, "segments", where)
            ]
            w_star = edge.get("w_star", default_w_star)
            if w_star is None:
                w_star = max(max(segment.value_range()[1] for segment in segments), 0.0)
            schedules[(i, j)] = WeightSchedule(segments, float(w_star), edge.get("period"))
        except ScenarioError:
            raise
        except (SyncIndexError, KeyError, ValueError, TypeError) as e:
            raise ScenarioError(f"{where}: {e}")
    try:
        return GraphSignal(n_nodes, schedules)
    except SyncIndexError as e:
        raise ScenarioError(f"graph: {e}")


def _graph_to_dict(g: GraphSignal) -> dict:
    edges = []
    for (i, j), schedule in g.schedules.items():
        edges.append({"i": i, "j": j, **schedule.to_dict()})
    return {"n_nodes": g.n_nodes, "edges": edges}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plant: PlantConfig
    design: DesignConfig
    graph: GraphSignal
    init: InitConfig
    sim: SimConfig
    analysis: AnalysisConfig
    comment: str = field(default="", compare=False)

    def __post_init__(self):
        self.validate()

    @property
    def n(self) -> int:
        return len(self.plant.A)

    @property
    def m(self) -> int:
        return len(self.plant.B[0])

    @property
    def N(self) -> int:
        return self.graph.n_nodes

    @property
    def horizon(self) -> float:
        return self.sim.t_end if self.analysis.horizon is None else self.analysis.horizon

    @property
    def t_skip(self) -> float:
        return constants.T_SKIP_FRACTION * self.sim.t_end if self.analysis.t_skip is None else self.analysis.t_skip

    @property
    def stride(self) -> float:
        return constants.STRIDE_FRACTION * self.analysis.T if self.analysis.stride is None else self.analysis.stride

    def build_plant(self) -> Plant:
        return self.plant.build()

    def initial_state(self) -> np.ndarray:
        return self.init.initial_state(self.n * self.N)

    def validate(self):
        """
        Checks that every dimension agrees.

        :raises ScenarioError: Naming the offending field.
        """
        n, m, N = self.n, self.m, self.N
        if any(len(row) != n for row in self.plant.A):
            raise ScenarioError(f"plant.A: must be square, got {len(self.plant.A)} rows of lengths {[len(r) for r in self.plant.A]}")
        if len(self.plant.B) != n:
            raise ScenarioError(f"plant.B: has {len(self.plant.B)} rows but A is {n}x{n}")
        shapes = {"K": (m, n), "P": (n, n), "Q": (n, n)}
        for key, shape in shapes.items():
            matrix = getattr(self.design, key)
            if matrix is not None and (len(matrix), len(matrix[0])) != shape:
                raise ScenarioError(f"design.{key}: expected {shape[0]}x{shape[1]}, got {len(matrix)}x{len(matrix[0])}")
        if self.init.x0 is not None and len(self.init.x0) != n * N:
            raise ScenarioError(f"init.x0: expected n*N = {n * N} entries, got {len(self.init.x0)}")
        if not self.sim.t_end > 0 or not self.sim.dt > 0 or self.sim.record_every < 1:
            raise ScenarioError(f"sim: t_end and dt must be positive and record_every at least 1, got {self.sim}")
        if not self.analysis.delta > 0 or not self.analysis.T > 0:
            raise ScenarioError(f"analysis: delta and T must be positive, got {self.analysis}")
        if self.graph.end < self.horizon:
            raise ScenarioError(f"graph: schedules end at t={self.graph.end} before the horizon {self.horizon}")

    def to_dict(self) -> dict:
        data = {"name": self.name}
        if self.comment:
            data["comment"] = self.comment
        data.update({
            "plant": {"A": _listed(self.plant.A), "B": _listed(self.plant.B)},
            "design": self.design.to_dict(),
            "graph": _graph_to_dict(self.graph),
            "init": self.init.to_dict(),
            "sim": self.sim.to_dict(),
            "analysis": self.analysis.to_dict(),
        })
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        """
        :raises ScenarioError: If a field is missing or invalid.
        """
        if not isinstance(data, dict):
            raise ScenarioError(f"scenario: expected a JSON object, got {type(data).__name__}")
        validate_schema(data)
        plant = _require(data, "plant", "scenario")
        sim = _require(data, "sim", "scenario")
        analysis = _require(data, "analysis", "scenario")
        try:
            return cls(
                name=str(data.get("name", "scenario")),
                comment=str(data.get("comment", "")),
                plant=PlantConfig(_matrix(_require(plant, "A", "plant"), "plant.A"), _matrix(_require(plant, "B", "plant"), "plant.B")),
                design=DesignConfig.from_dict(_require(data, "design", "scenario")),
                graph=_graph_from_dict(_require(data, "graph", "scenario")),
                init=InitConfig.from_dict(_require(data, "init", "scenario")),
                sim=SimConfig(
                    float(_require(sim, "t_end", "sim")),
                    float(sim.get("dt", constants.DT)),
                    int(sim.get("record_every", 1)),
                ),
                analysis=AnalysisConfig(
                    float(_require(analysis, "delta", "analysis")),
                    float(_require(analysis, "T", "analysis")),
                    *(None if analysis.get(key) is None else float(analysis[key]) for key in ("stride", "t_skip", "horizon")),
                ),
            )
        except (TypeError, ValueError) as e:
            raise ScenarioError(f"scenario: {e}")


def load_scenario(path: PathLike) -> ScenarioConfig:
    """
    Parses and validates a scenario file.

    :raises ScenarioError: With line and column for malformed JSON, or naming the invalid field.
    """
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"{path}: cannot read scenario ({e})")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    logger.debug(f"Loaded scenario file {path}")
    return ScenarioConfig.from_dict(data)


def dump_scenario(config: ScenarioConfig, path: PathLike):
    """
    Writes a scenario file that load_scenario reads back to an equal config.
    """
    path = pathlib.Path(path)
    path.write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")


def bundled_scenario_path(number: int) -> pathlib.Path:
    """
    Path of a bundled example scenario (1 to 4).

    :raises ScenarioError: For an unknown example number.
    """
    path = DATA_DIR / f"example{number}.json"
    if not path.exists():
        raise ScenarioError(f"No bundled example {number}. Expected 1, 2, 3 or 4")
    return path


def bundled_scenario(number: int) -> ScenarioConfig:
    return load_scenario(bundled_scenario_path(number))
