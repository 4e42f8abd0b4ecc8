"""Problem data model: tasks, vehicles, defaults, TSPLIB ingestion.

An :class:`Instance` is immutable after construction and fully determines
the roadmap given its seed, so identical instances always reproduce
identical runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

GRAVITY_DEFAULT = 9.80  # m/s^2; reproduces the published (velocity, radius) pairs

#: Default depot locations, used in order as the fleet grows.
DEFAULT_DEPOTS = ((110.0, 230.0), (1800.0, 2100.0), (200.0, 1500.0), (1700.0, 1000.0))

DEFAULT_VELOCITY = 70.0
DEFAULT_LOAD_FACTOR = 4.0
DEFAULT_SENSING_RANGE = 150.0
DEFAULT_SAMPLES_PER_CLUSTER = 5
DEFAULT_ALPHA = 0.5


class InstanceError(ValueError):
    """Invalid instance data; the message lists every violated invariant."""


class TsplibError(ValueError):
    """Malformed TSPLIB input."""


def turn_radius(velocity: float, load_factor: float, gravity: float = GRAVITY_DEFAULT) -> float:
    """Minimum turn radius of a coordinated level turn.

    radius = velocity^2 / (gravity * sqrt(load_factor^2 - 1))
    """
    if velocity <= 0.0:
        raise InstanceError(f"velocity must be positive, got {velocity}")
    if gravity <= 0.0:
        raise InstanceError(f"gravity must be positive, got {gravity}")
    if load_factor <= 1.0:
        raise InstanceError(f"load_factor must exceed 1, got {load_factor}")
    return velocity * velocity / (gravity * math.sqrt(load_factor * load_factor - 1.0))


@dataclass(frozen=True)
class Task:
    """A task disk: visiting any pose inside it completes the task."""

    id: int
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class VehicleSpec:
    """One vehicle: dynamics, depot/terminal locations, sensing range."""

    id: int
    velocity: float
    load_factor: float
    depot: tuple[float, float]
    terminal: tuple[float, float]
    sensing_range: float
    gravity: float = GRAVITY_DEFAULT
    r_min: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "r_min", turn_radius(self.velocity, self.load_factor, self.gravity))


@dataclass(frozen=True)
class Instance:
    tasks: tuple[Task, ...]
    vehicles: tuple[VehicleSpec, ...]
    alpha: float
    cost_metric: str
    samples_per_cluster: int
    seed: int
    nin_enabled: bool = True

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    def validate(self) -> None:
        """Raise :class:`InstanceError` listing every violated invariant."""
        problems = []
        if self.n_tasks < 1:
            problems.append("at least one task is required")
        if self.n_vehicles < 1:
            problems.append("at least one vehicle is required")
        ids = [t.id for t in self.tasks]
        if ids != list(range(1, len(ids) + 1)):
            problems.append(f"task ids must be 1..n contiguous, got {ids}")
        for t in self.tasks:
            if t.radius <= 0.0:
                problems.append(f"task {t.id}: radius must be positive, got {t.radius}")
        vids = [v.id for v in self.vehicles]
        if vids != list(range(1, len(vids) + 1)):
            problems.append(f"vehicle ids must be 1..m contiguous, got {vids}")
        for v in self.vehicles:
            if v.velocity <= 0.0:
                problems.append(f"vehicle {v.id}: velocity must be positive")
            if v.load_factor <= 1.0:
                problems.append(f"vehicle {v.id}: load_factor must exceed 1")
            if v.sensing_range <= 0.0:
                problems.append(f"vehicle {v.id}: sensing_range must be positive")
            if v.r_min <= 0.0:
                problems.append(f"vehicle {v.id}: degenerate turn radius {v.r_min}")
        if not 0.0 <= self.alpha <= 1.0:
            problems.append(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.cost_metric not in ("length", "time"):
            problems.append(f"cost_metric must be 'length' or 'time', got {self.cost_metric!r}")
        if self.samples_per_cluster < 1:
            problems.append(f"samples_per_cluster must be >= 1, got {self.samples_per_cluster}")
        if problems:
            raise InstanceError("; ".join(problems))

    def to_json(self) -> str:
        """Canonical JSON; byte-stable for a fixed instance."""
        doc = {
            "tasks": [{"id": t.id, "center": list(t.center), "radius": t.radius} for t in self.tasks],
            "vehicles": [
                {
                    "id": v.id,
                    "velocity": v.velocity,
                    "load_factor": v.load_factor,
                    "gravity": v.gravity,
                    "depot": list(v.depot),
                    "terminal": list(v.terminal),
                    "sensing_range": v.sensing_range,
                }
                for v in self.vehicles
            ],
            "alpha": self.alpha,
            "cost_metric": self.cost_metric,
            "samples_per_cluster": self.samples_per_cluster,
            "seed": self.seed,
            "nin_enabled": self.nin_enabled,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "Instance":
        doc = json.loads(text)
        tasks = tuple(
            Task(id=t["id"], center=tuple(t["center"]), radius=t["radius"]) for t in doc["tasks"]
        )
        vehicles = tuple(
            VehicleSpec(
                id=v["id"],
                velocity=v["velocity"],
                load_factor=v["load_factor"],
                gravity=v.get("gravity", GRAVITY_DEFAULT),
                depot=tuple(v["depot"]),
                terminal=tuple(v["terminal"]),
                sensing_range=v["sensing_range"],
            )
            for v in doc["vehicles"]
        )
        inst = Instance(
            tasks=tasks,
            vehicles=vehicles,
            alpha=doc["alpha"],
            cost_metric=doc["cost_metric"],
            samples_per_cluster=doc["samples_per_cluster"],
            seed=doc["seed"],
            nin_enabled=doc.get("nin_enabled", True),
        )
        inst.validate()
        return inst


def load_tsplib(text: str) -> list[tuple[float, float]]:
    """Parse a TSPLIB NODE_COORD_SECTION coordinate list.

    Returns the coordinates in file order; the count must match the
    DIMENSION header.  Raises :class:`TsplibError` with a line number on
    malformed rows.
    """
    dimension = None
    coords: list[tuple[float, float]] = []
    in_section = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper.startswith("DIMENSION"):
            try:
                dimension = int(line.split(":")[-1].strip().split()[-1])
            except (ValueError, IndexError):
                raise TsplibError(f"line {lineno}: unreadable DIMENSION header: {line!r}")
            continue
        if upper.startswith("NODE_COORD_SECTION"):
            in_section = True
            continue
        if upper.startswith("EOF"):
            break
        if in_section:
            parts = line.split()
            if len(parts) < 3:
                raise TsplibError(f"line {lineno}: expected 'index x y', got {line!r}")
            try:
                coords.append((float(parts[1]), float(parts[2])))
            except ValueError:
                raise TsplibError(f"line {lineno}: non-numeric coordinate in {line!r}")
    if dimension is None:
        raise TsplibError("missing DIMENSION header")
    if not in_section and dimension > 0:
        raise TsplibError("missing NODE_COORD_SECTION")
    if len(coords) != dimension:
        raise TsplibError(f"DIMENSION says {dimension} but found {len(coords)} coordinate rows")
    return coords


def builtin_task_centers(name: str = "bays29") -> list[tuple[float, float]]:
    """Coordinates of a bundled benchmark point set."""
    ref = resources.files("ghmdatsp.data").joinpath(f"{name}.tsp")
    if not ref.is_file():
        raise InstanceError(f"no bundled point set named {name!r}")
    return load_tsplib(ref.read_text())


def build_instance(
    task_centers: list[tuple[float, float]] | None = None,
    *,
    n_vehicles: int = 1,
    samples_per_cluster: int = DEFAULT_SAMPLES_PER_CLUSTER,
    alpha: float = DEFAULT_ALPHA,
    velocity: float | list[float] = DEFAULT_VELOCITY,
    load_factor: float | list[float] = DEFAULT_LOAD_FACTOR,
    sensing_range: float | list[float] = DEFAULT_SENSING_RANGE,
    task_radius: float | None = None,
    cost_metric: str = "length",
    nin_enabled: bool = True,
    depots: list[tuple[float, float]] | None = None,
    terminals: list[tuple[float, float]] | None = None,
    gravity: float = GRAVITY_DEFAULT,
    seed: int = 0,
) -> Instance:
    """Assemble a validated :class:`Instance` from defaults plus overrides.

    Task centers default to the bundled bays29 point set.  Depots are taken
    in order from the default list; each terminal coincides with its depot
    unless overridden, which closes the tours.  Scalar vehicle parameters
    broadcast across the fleet.
    """
    if task_centers is None:
        task_centers = builtin_task_centers()

    def per_vehicle(value, name):
        if isinstance(value, (int, float)):
            return [float(value)] * n_vehicles
        vals = [float(v) for v in value]
        if len(vals) != n_vehicles:
            raise InstanceError(f"{name}: expected {n_vehicles} values, got {len(vals)}")
        return vals

    velocities = per_vehicle(velocity, "velocity")
    load_factors = per_vehicle(load_factor, "load_factor")
    ranges = per_vehicle(sensing_range, "sensing_range")

    if depots is None:
        if n_vehicles > len(DEFAULT_DEPOTS):
            raise InstanceError(
                f"only {len(DEFAULT_DEPOTS)} default depots available; pass depots explicitly"
            )
        depots = [DEFAULT_DEPOTS[k] for k in range(n_vehicles)]
    if terminals is None:
        terminals = list(depots)

    if task_radius is None:
        task_radius = ranges[0]

    tasks = tuple(
        Task(id=i + 1, center=(float(x), float(y)), radius=float(task_radius))
        for i, (x, y) in enumerate(task_centers)
    )
    vehicles = tuple(
        VehicleSpec(
            id=k + 1,
            velocity=velocities[k],
            load_factor=load_factors[k],
            gravity=gravity,
            depot=(float(depots[k][0]), float(depots[k][1])),
            terminal=(float(terminals[k][0]), float(terminals[k][1])),
            sensing_range=ranges[k],
        )
        for k in range(n_vehicles)
    )
    inst = Instance(
        tasks=tasks,
        vehicles=vehicles,
        alpha=float(alpha),
        cost_metric=cost_metric,
        samples_per_cluster=int(samples_per_cluster),
        seed=int(seed),
        nin_enabled=bool(nin_enabled),
    )
    inst.validate()
    return inst
