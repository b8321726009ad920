from __future__ import annotations
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any
import hashlib
import json

from ..core.sequences import Family


class ValidationException(Exception):
    """Invalid experiment configuration; `errors` lists every violated field."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("invalid configuration:\n  " + "\n  ".join(errors))
        self.errors = errors


class TaskType(Enum):
    PAIRCORR = "paircorr"
    ENERGY = "energy"
    VARIANCE = "variance"
    SELBERG_CHECK = "selberg-check"
    WATT_CHECK = "watt-check"


STOCHASTIC_TASKS = {TaskType.PAIRCORR, TaskType.VARIANCE, TaskType.SELBERG_CHECK}
SEQUENCE_TASKS = {TaskType.PAIRCORR, TaskType.ENERGY, TaskType.VARIANCE}
FORMATS = {"csv", "json", "svg"}


@dataclass
class SequenceSpec:
    family: str = Family.POWER.value
    thetas: list[float] = field(default_factory=list)
    A: float = 1.0
    n0: int | None = None
    path: str | None = None

    @property
    def d(self) -> int | None:
        try:
            family = Family(self.family)
        except ValueError:
            return None
        match family:
            case Family.POWER:
                return len(self.thetas) if isinstance(self.thetas, list) else None
            case Family.NLOG:
                return 2
            case _:
                return None

    @property
    def params(self) -> dict[str, Any]:
        match Family(self.family):
            case Family.POWER:
                return {"thetas": self.thetas}
            case Family.NLOG:
                return {"A": self.A}
            case _:
                return {"path": self.path}


@dataclass
class AlphaSpec:
    """
    How dilations are chosen.

    :param measure: `mu` for draws from the sin^2 measure, `fixed` for `values`.
    :param samples: number of draws for `mu`.
    :param values: explicit dilation vectors for `fixed`.
    :param gamma: bandwidth of the measure in every coordinate.
    """

    measure: str = "mu"
    samples: int = 20
    values: list[list[float]] = field(default_factory=list)
    gamma: float = 0.5


@dataclass
class SelbergSpec:
    triples: int = 20
    grid: int = 10_000
    max_degree: int = 64
    tensor_points: int = 1_000


@dataclass
class WattSpec:
    """
    Sweep of the solution-count diagnostic.

    :param omega: `identity` for omega(u) = u, `sequence` for the rows u of the
        configured sequence (1-based).
    """

    A: list[int] = field(default_factory=lambda: list(range(1, 9)))
    deltas: list[float] = field(default_factory=lambda: [0.5, 0.25, 0.125])
    Ms: list[int] = field(default_factory=lambda: [1, 2])
    omega: str = "identity"


@dataclass
class OutputSpec:
    directory: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json", "svg"])


@dataclass
class ExperimentConfig:
    """
    A complete experiment definition, read from a single JSON document.

    Unknown keys anywhere are rejected so that typos never pass silently.
    """

    sequence: SequenceSpec
    tasks: list[TaskType]
    N_grid: list[int]
    d: int | None = None
    s_grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    gamma: list[float] = field(default_factory=list)
    subset: list[int] | None = None
    alpha: AlphaSpec = field(default_factory=AlphaSpec)
    seed: int | None = None
    r: int = 1
    samples: int = 200
    norm: str = "sup"
    window: str = "prefix"
    selberg: SelbergSpec = field(default_factory=SelbergSpec)
    watt: WattSpec = field(default_factory=WattSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def dim(self) -> int:
        return self.d if self.d is not None else (self.sequence.d or 1)

    @property
    def thresholds(self) -> list[float]:
        """Energy thresholds for the constrained columns, 1 each by default."""
        subset = self.subset if self.subset is not None else list(range(self.dim))
        return self.gamma or [1.0] * len(subset)

    def to_dict(self) -> dict[str, Any]:
        raw = asdict(self)
        raw["tasks"] = [t.value for t in self.tasks]
        return raw

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; independent of key order."""
        return dict_hash(self.to_dict())

    @classmethod
    def from_dict(cls, raw: Any) -> ExperimentConfig:
        """
        Parse and validate a configuration document.

        :raises ValidationException: listing every violated field.
        """
        return _Parser().parse(raw)


def dict_hash(d: dict[str, Any]) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """
    Read a configuration file. Top level keys of `overrides` replace those of
    the document before validation.

    :raises ValidationException: when the document is not valid JSON or not a valid configuration.
    :raises OSError: when the file cannot be read.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationException([f"<document>: not valid JSON ({e})"])
    if overrides and isinstance(raw, dict):
        raw = {**raw, **overrides}
    return ExperimentConfig.from_dict(raw)


class _Parser:
    """Collects every problem instead of stopping at the first one."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, where: str, msg: str) -> None:
        self.errors.append(f"{where}: {msg}")

    def section(self, raw: Any, where: str, cls) -> Any:
        if raw is None:
            return cls()
        if not isinstance(raw, dict):
            self.fail(where, "must be an object")
            return cls()
        allowed = set(cls.__dataclass_fields__)
        for key in sorted(set(raw) - allowed):
            self.fail(f"{where}.{key}", "unknown key")
        return cls(**{k: v for k, v in raw.items() if k in allowed})

    def numbers(self, value: Any, where: str, kind=float, positive=False) -> list:
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            self.fail(where, "must be a list of numbers")
            return []
        if kind is int and any(int(v) != v for v in value):
            self.fail(where, "must hold integers")
            return []
        if positive and any(v <= 0 for v in value):
            self.fail(where, "must hold positive values")
        return [kind(v) for v in value]

    def parse(self, raw: Any) -> ExperimentConfig:
        if not isinstance(raw, dict):
            raise ValidationException(["<document>: must be a JSON object"])
        allowed = set(ExperimentConfig.__dataclass_fields__)
        for key in sorted(set(raw) - allowed):
            self.fail(key, "unknown key")

        sequence = self.section(raw.get("sequence"), "sequence", SequenceSpec)
        alpha = self.section(raw.get("alpha"), "alpha", AlphaSpec)
        selberg = self.section(raw.get("selberg"), "selberg", SelbergSpec)
        watt = self.section(raw.get("watt"), "watt", WattSpec)
        output = self.section(raw.get("output"), "output", OutputSpec)

        tasks = self.parse_tasks(raw.get("tasks"))
        N_grid = self.numbers(raw.get("N_grid", []), "N_grid", int, positive=True)
        if not N_grid and TaskType.WATT_CHECK not in tasks and TaskType.SELBERG_CHECK not in tasks:
            self.fail("N_grid", "must be nonempty")
        if any(a >= b for a, b in zip(N_grid, N_grid[1:])):
            self.fail("N_grid", "must be strictly increasing")

        s_grid = self.numbers(raw.get("s_grid", [0.5, 1.0, 2.0]), "s_grid", float, positive=True)
        if not s_grid or any(a >= b for a, b in zip(s_grid, s_grid[1:])):
            self.fail("s_grid", "must be nonempty and strictly increasing")

        gamma = self.numbers(raw.get("gamma", []), "gamma", float, positive=True)
        if any(g > 1 for g in gamma):
            self.fail("gamma", "thresholds must lie in (0, 1]")

        if raw.get("sequence") is not None or SEQUENCE_TASKS & set(tasks):
            self.check_sequence(sequence)
        d = raw.get("d")
        if d is not None and (not isinstance(d, int) or d < 1):
            self.fail("d", "must be a positive integer")
            d = None
        elif d is not None and sequence.d is not None and d != sequence.d:
            self.fail("d", f"does not match the sequence dimension {sequence.d}")
        dim = d or sequence.d or 1

        subset = raw.get("subset")
        if subset is not None:
            subset = self.numbers(subset, "subset", int)
            if not subset or any(not 0 <= l < dim for l in subset) or len(set(subset)) != len(subset):
                self.fail("subset", f"must list distinct column indices in [0, {dim})")
        if gamma and len(gamma) != len(subset if subset is not None else range(dim)):
            self.fail("gamma", "needs one threshold per constrained column")

        seed = raw.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
            self.fail("seed", "must be a nonnegative integer")
        if seed is None and STOCHASTIC_TASKS & set(tasks):
            self.fail("seed", "is required by the stochastic tasks")

        self.check_alpha(alpha, dim, TaskType.PAIRCORR in tasks)
        self.check_misc(raw, selberg, watt, output)

        if self.errors:
            raise ValidationException(self.errors)
        return ExperimentConfig(
            sequence=sequence,
            tasks=tasks,
            N_grid=N_grid,
            d=d,
            s_grid=s_grid,
            gamma=gamma,
            subset=subset,
            alpha=alpha,
            seed=seed,
            r=raw.get("r", 1),
            samples=raw.get("samples", 200),
            norm=raw.get("norm", "sup"),
            window=raw.get("window", "prefix"),
            selberg=selberg,
            watt=watt,
            output=output,
        )

    def parse_tasks(self, value: Any) -> list[TaskType]:
        if not isinstance(value, list) or not value:
            self.fail("tasks", "must be a nonempty list")
            return []
        tasks = []
        for t in value:
            try:
                tasks.append(TaskType(t))
            except ValueError:
                self.fail("tasks", f"unknown task {t!r}")
        if len(set(tasks)) != len(tasks):
            self.fail("tasks", "lists a task twice")
        return tasks

    def check_sequence(self, seq: SequenceSpec) -> None:
        try:
            family = Family(seq.family)
        except ValueError:
            self.fail("sequence.family", f"unknown family {seq.family!r}")
            return
        match family:
            case Family.POWER:
                thetas = self.numbers(seq.thetas, "sequence.thetas", float, positive=True)
                if not thetas:
                    self.fail("sequence.thetas", "power sequences need at least one exponent")
            case Family.NLOG:
                if not isinstance(seq.A, (int, float)) or seq.A < 1:
                    self.fail("sequence.A", "must be a number >= 1")
                if isinstance(seq.n0, int) and seq.n0 < 2:
                    self.fail("sequence.n0", "nlog sequences start at n0 >= 2")
            case Family.FILE:
                if not seq.path:
                    self.fail("sequence.path", "file sequences need a path")
        if seq.n0 is not None and (not isinstance(seq.n0, int) or seq.n0 < 1):
            self.fail("sequence.n0", "must be a positive integer")

    def check_alpha(self, alpha: AlphaSpec, dim: int, needed: bool) -> None:
        if alpha.measure not in ("mu", "fixed"):
            self.fail("alpha.measure", "must be 'mu' or 'fixed'")
        if not isinstance(alpha.gamma, (int, float)) or alpha.gamma <= 0:
            self.fail("alpha.gamma", "must be positive")
        if alpha.measure == "mu" and (not isinstance(alpha.samples, int) or alpha.samples < 1):
            self.fail("alpha.samples", "must be a positive integer")
        if alpha.measure == "fixed":
            if needed and not alpha.values:
                self.fail("alpha.values", "fixed dilations need at least one vector")
            for i, v in enumerate(alpha.values):
                if len(self.numbers(v, f"alpha.values[{i}]")) != dim:
                    self.fail(f"alpha.values[{i}]", f"must hold {dim} numbers")

    def check_misc(self, raw: dict, selberg: SelbergSpec, watt: WattSpec, output: OutputSpec) -> None:
        r = raw.get("r", 1)
        if not isinstance(r, int) or r < 1:
            self.fail("r", "must be a positive integer")
        samples = raw.get("samples", 200)
        if not isinstance(samples, int) or samples < 2:
            self.fail("samples", "must be an integer >= 2")
        if raw.get("norm", "sup") not in ("sup", "euclid"):
            self.fail("norm", "must be 'sup' or 'euclid'")
        if raw.get("window", "prefix") not in ("prefix", "block"):
            self.fail("window", "must be 'prefix' or 'block'")
        for name in ("triples", "grid", "max_degree", "tensor_points"):
            v = getattr(selberg, name)
            if not isinstance(v, int) or v < 1:
                self.fail(f"selberg.{name}", "must be a positive integer")
        if not self.numbers(watt.A, "watt.A", int):
            self.fail("watt.A", "must be a nonempty integer list")
        self.numbers(watt.deltas, "watt.deltas", float, positive=True)
        if any(m < 1 for m in self.numbers(watt.Ms, "watt.Ms", int)):
            self.fail("watt.Ms", "must hold positive integers")
        if watt.omega not in ("identity", "sequence"):
            self.fail("watt.omega", "must be 'identity' or 'sequence'")
        if not isinstance(output.directory, str) or not output.directory:
            self.fail("output.directory", "must be a nonempty path")
        if not isinstance(output.formats, list) or not set(output.formats) <= FORMATS:
            self.fail("output.formats", f"must be a subset of {sorted(FORMATS)}")
