"""JSON, text and DOT renderings of analysis results."""

from __future__ import annotations

import json
from typing import Optional

from .analyzer import ConditionReport, Quotient
from .cylinders import ClopenSet, all_words, format_word
from .orbits import words_meeting, level_perms
from .words import GeneratingSet

SCHEMA_VERSION = 1
COLORS = ("red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "gray")


def envelope(kind: str, payload: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": kind, "result": payload}


def dumps(obj) -> str:
    """Byte-stable JSON: sorted keys, fixed indentation."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def report_text(report: ConditionReport, gens: GeneratingSet) -> str:
    us = report.ustar
    lines = [f"system {report.system or '?'}  U = {report.U}",
             f"U* = {us.approximation}" + ("" if us.stabilized else "  (approximation)")
             + f"  open: {us.open}"]
    for c in report.conditions:
        tag = "" if c.finding.exact else "  [surrogate]"
        lines.append(f"  ({c.label:>3}) {c.verdict.value:<7} {c.finding.evidence.get('reason', '')}{tag}")
    lines.append(f"consistent: {'yes' if report.consistent else 'NO'}")
    return "\n".join(lines)


def dot_graph(gens: GeneratingSet, d: int, quotient: Optional[Quotient] = None) -> str:
    """Depth-``d`` reachability graph: one node per word, one edge colour per generator."""
    k = gens.k
    words = list(all_words(k, d))
    out = ["digraph reachability {", "  node [shape=box, fontname=monospace];"]
    if quotient is not None:
        for i, cls in enumerate(quotient.classes):
            out.append(f"  subgraph cluster_{i} {{ label=\"class {i}\";")
            out.extend(f"    \"{format_word(w)}\";" for w in cls)
            out.append("  }")
    for w in words:
        out.append(f"  \"{format_word(w)}\";")
    perms = level_perms(gens, d) if gens.is_synchronous else None
    for j, s in enumerate(gens):
        if s.is_identity:
            continue
        color = COLORS[(j - 1) % len(COLORS)]
        for i, w in enumerate(words):
            if perms is not None:
                targets = [words[perms[j][i]]]
            else:
                targets = sorted(set(words_meeting(s.image(ClopenSet.cylinder(k, w)), d)))
            for u in targets:
                out.append(f"  \"{format_word(w)}\" -> \"{format_word(u)}\" "
                           f"[color={color}, label=\"{gens.names[j]}\"];")
    out.append("}")
    return "\n".join(out) + "\n"
