"""System description files.

A system is a JSON object::

    {"name": "odometer", "alphabet": 2, "notes": "...",
     "generators": [{"name": "a", "type": "mealy", "delta": ..., "lambda": ...}]}

Each generator is a machine object as accepted by
:func:`cantordyn.homeos.machine_from_json`, with an optional ``name``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .cylinders import check_alphabet
from .errors import AlphabetError, MachineClassError, SchemaError
from .homeos import Homeomorphism, machine_from_json
from .words import GeneratingSet


@dataclass
class SystemDescription:
    name: str
    alphabet: int
    generators: List[Tuple[str, Homeomorphism]]
    notes: str = ""
    _gens: Optional[GeneratingSet] = field(default=None, repr=False, compare=False)

    def generating_set(self) -> GeneratingSet:
        """The symmetrized set; built once so its caches are shared."""
        if self._gens is None:
            if self.generators:
                self._gens = GeneratingSet([g for _, g in self.generators],
                                           [n for n, _ in self.generators])
            else:
                from .homeos import Transducer
                self._gens = GeneratingSet([Transducer.identity(self.alphabet)])
        return self._gens

    @property
    def symmetrization_log(self) -> List[str]:
        return list(self.generating_set().adjoined)

    def to_json(self) -> dict:
        gens = []
        for name, g in self.generators:
            obj = {"name": name}
            obj.update(g.to_json())
            gens.append(obj)
        return {"name": self.name, "alphabet": self.alphabet, "notes": self.notes,
                "generators": gens}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def system_from_json(obj, source: str = "system") -> SystemDescription:
    if not isinstance(obj, dict):
        raise SchemaError(source, "expected a JSON object")
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise SchemaError(f"{source}.name", "expected a string")
    k = obj.get("alphabet", 2)
    if not isinstance(k, int) or isinstance(k, bool):
        raise SchemaError(f"{source}.alphabet", "expected an integer")
    try:
        check_alphabet(k)
    except AlphabetError as e:
        raise SchemaError(f"{source}.alphabet", str(e)) from None
    raw = obj.get("generators")
    if not isinstance(raw, list):
        raise SchemaError(f"{source}.generators", "expected a list")
    gens = []
    for i, m in enumerate(raw):
        path = f"{source}.generators[{i}]"
        g = machine_from_json(m, k, path)
        gname = m.get("name", f"s{i}") if isinstance(m, dict) else f"s{i}"
        if not isinstance(gname, str) or not gname:
            raise SchemaError(f"{path}.name", "expected a nonempty string")
        gens.append((gname, g))
    kinds = {g.kind for _, g in gens if not g.is_identity}
    if len(kinds) > 1:
        raise MachineClassError(f"{source}.generators: mixed machine classes {sorted(kinds)}")
    notes = obj.get("notes", "")
    return SystemDescription(name, k, gens, notes if isinstance(notes, str) else "")


def load_system(path) -> SystemDescription:
    path = Path(path)
    text = path.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    return system_from_json(obj, str(path.name))
