"""Exact and budgeted analysis of finitely generated groups acting on Cantor space.

Generators are synchronous Mealy transducers or prefix-exchange maps on
``A^ω``; clopen sets and ultimately periodic points are represented exactly.
"""

from .analyzer import (Verdict, almost_periodic, distal_report, equicontinuity_report,
                       minimal_on_closure, proximal, quotient_Y, relation_closed, s_recurrent,
                       theorem_consistency, u_star)
from .config import Budgets
from .cylinders import ClopenSet, Entourage, Point, normalize, parse_clopen, parse_point
from .homeos import PrefixExchange, Transducer, machine_from_json
from .orbits import orbit_closure
from .systems import SystemDescription, load_system
from .tower import build_tower, shell_walk, translate_family, v_infinity_verdict
from .words import GeneratingSet, ball, cone_members, replete_constant

__version__ = "0.1.0"

__all__ = [
    "Budgets", "ClopenSet", "Entourage", "GeneratingSet", "Point", "PrefixExchange",
    "SystemDescription", "Transducer", "Verdict", "almost_periodic", "ball", "build_tower",
    "cone_members", "distal_report", "equicontinuity_report", "load_system", "machine_from_json",
    "minimal_on_closure", "normalize", "orbit_closure", "parse_clopen", "parse_point", "proximal",
    "quotient_Y", "relation_closed", "replete_constant", "s_recurrent", "shell_walk",
    "theorem_consistency", "translate_family", "u_star", "v_infinity_verdict",
]
