"""Budgets shared by the tower, analyzer and CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .homeos import DEFAULT_PAIR_CAP
from .words import DEFAULT_MAX_MACHINE, default_max_elements


@dataclass(frozen=True)
class Budgets:
    depth: int = 10               # deepest level used for exact level-action checks
    radius: int = 6               # word-metric radius explored by recurrence/proximality
    max_n: int = 20               # deepest tower level
    max_elements: int = 0         # 0 -> environment override or 20_000
    max_machine: int = DEFAULT_MAX_MACHINE
    max_pairs: int = DEFAULT_PAIR_CAP
    sample_bound: int = 6         # |u| + |v| for the standard point sample
    fixed_point_radius: int = 3   # fixed points of ball elements join the sample
    orbit_limit: int = 256        # points explored when testing for a finite orbit
    attractor_radius: int = 3     # ball radius searched for contracting elements
    witness_bound: int = 3        # |t| + |v| for witness points inside a cylinder
    recur_depth: int = 1          # neighbourhood depth for S-recurrence tests
    recur_cap: int = 0            # cone length cap; 0 -> radius
    proximity_threshold: int = 8  # agreement depth counted as "close"
    family_depth: int = 2         # sub-cylinders of U tested in condition (iii)
    stability_window: int = 2     # depths over which class partitions must agree
    translate_depth: int = 4      # (m, n) range of recorded translate counts

    def __post_init__(self):
        if self.max_elements <= 0:
            object.__setattr__(self, "max_elements", default_max_elements())
        if self.recur_cap <= 0:
            object.__setattr__(self, "recur_cap", self.radius)

    def with_(self, **changes) -> "Budgets":
        if "radius" in changes and "recur_cap" not in changes:
            changes["recur_cap"] = 0
        return replace(self, **changes)

    def machine_cap(self, gens) -> int:
        return self.max_machine if gens.is_synchronous else self.max_pairs

    def to_json(self) -> dict:
        return asdict(self)
