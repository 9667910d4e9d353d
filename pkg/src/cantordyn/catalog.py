"""Built-in example systems on the binary alphabet."""

from __future__ import annotations

from typing import Dict, List

from .homeos import PrefixExchange, Transducer, mealy_from_recursion
from .systems import SystemDescription

ID, SWAP = (0, 1), (1, 0)


def _recursive(states, names):
    return [(n, mealy_from_recursion(2, states, n)) for n in names]


def _word(s):
    return tuple(int(c) for c in s)


def _px(pairs):
    return PrefixExchange.from_pairs([(_word(p), _word(q)) for p, q in pairs], 2)


def _build() -> Dict[str, SystemDescription]:
    out = {}

    def add(name, gens, notes):
        out[name] = SystemDescription(name, 2, gens, notes)

    add("identity", [], "trivial group")
    add("odometer", _recursive({"a": (SWAP, ("e", "a")), "e": (ID, ("e", "e"))}, ["a"]),
        "binary adding machine a(0w)=1w, a(1w)=0a(w); minimal and equicontinuous")
    add("flip", [("f", Transducer.from_tables([[1, 1], [1, 1]], [[1, 0], [0, 1]]))],
        "flips the first letter only; every orbit has at most two points")
    grig = {"a": (SWAP, ("e", "e")), "b": (ID, ("a", "c")), "c": (ID, ("a", "d")),
            "d": (ID, ("e", "b")), "e": (ID, ("e", "e"))}
    add("grigorchuk", _recursive(grig, ["a", "b", "c", "d"]),
        "first Grigorchuk group from its 5-state automaton")
    add("lamplighter", _recursive({"a": (SWAP, ("a", "b")), "b": (ID, ("a", "b"))}, ["a", "b"]),
        "2-state automaton a(0w)=1a(w), a(1w)=0b(w), b(0w)=0a(w), b(1w)=1b(w)")
    add("fix-cylinder",
        _recursive({"t": (ID, ("a", "e")), "a": (SWAP, ("e", "a")), "e": (ID, ("e", "e"))}, ["t"]),
        "t(0w)=0a(w) with a the odometer, t(1w)=1w; [0] and [1] are invariant")
    add("contract-h", [("h", _px([("0", "00"), ("10", "01"), ("11", "1")]))],
        "prefix exchange contracting [0] towards 0^w; not distal")
    add("px-rotate", [("r", _px([("0", "10"), ("10", "11"), ("11", "0")]))],
        "prefix exchange of order three; every orbit is finite")
    return out


def catalog() -> Dict[str, SystemDescription]:
    """Fresh descriptions keyed by name (each call returns new objects)."""
    return _build()


def names() -> List[str]:
    return list(_build())


def get(name: str) -> SystemDescription:
    systems = _build()
    if name not in systems:
        raise KeyError(f"unknown catalog system {name!r}; choose from {', '.join(systems)}")
    return systems[name]
