"""Built-in domain and map corpus with documented hypothesis tags.

Tags record what each entry is documented (not machine-verified) to
satisfy: convexity is by construction; the shell-growth expectation
follows from the closed forms and envelope exponents; tautness is noted
for bounded convex domains.  Completeness of the Kobayashi distance is
only documented where classical, since it is not machine-checkable here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import (
    ConvexSupport,
    Domain,
    Egg,
    Intersection,
    Polydisk,
    PsiSupported,
    UnitBall,
    UnitDisk,
)
from .dynamics import (
    SelfMap,
    ball_boundary_contraction,
    disk_automorphism,
    rotation_map,
    scaling_map,
)


@dataclass
class CorpusDomain:
    name: str
    factory: object
    convex: bool
    goldilocks_expected: bool
    taut_documented: bool
    complete_documented: bool
    notes: str

    def build(self) -> Domain:
        return self.factory()


def _ball_lens() -> Intersection:
    a = ConvexSupport(2, ball=(np.array([-0.3, 0.0]), 1.0))
    b = ConvexSupport(2, ball=(np.array([0.3, 0.0]), 1.0))
    return Intersection(a, b, witness=np.zeros(2))


def _ball_box() -> Intersection:
    ball = ConvexSupport(2, ball=(np.zeros(2), 1.0))
    halves = []
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = 1.0
        halves += [(e, 0.7), (-e, 0.7), (1j * e, 0.7), (-1j * e, 0.7)]
    box = ConvexSupport(2, halfspaces=halves, enclosing_radius=1.4,
                        witness=np.zeros(2))
    return Intersection(ball, box, witness=np.zeros(2))


DOMAINS = {
    "unit_disk": CorpusDomain(
        "unit_disk", UnitDisk, True, True, True, True,
        "Poincare model; all closed forms available."),
    "unit_ball_2": CorpusDomain(
        "unit_ball_2", lambda: UnitBall(2), True, True, True, True,
        "Strongly convex; shell sup sqrt(2r - r^2)."),
    "unit_ball_3": CorpusDomain(
        "unit_ball_3", lambda: UnitBall(3), True, True, True, True,
        "Strongly convex in C^3."),
    "polydisk_2": CorpusDomain(
        "polydisk_2", lambda: Polydisk([1.0, 1.0]), True, False, True, True,
        "Product domain: shell sup is constant (fixed-size analytic disks "
        "hug the distinguished boundary), so the shell integral diverges."),
    "egg_1_2": CorpusDomain(
        "egg_1_2", lambda: Egg([1.0, 2.0], finite_type_model=(0.25, 0.5)),
        True, True, True, False,
        "Convex egg |z1|^2 + |z2|^4 < 1 with an assumed finite-type metric "
        "floor c=0.25, eps=0.5."),
    "psi_supported_s05": CorpusDomain(
        "psi_supported_s05", lambda: PsiSupported(0.5), True, True, True,
        False,
        "Envelope exponent s=0.5 < 1: infinite-order flat point with a "
        "convergent shell integral."),
    "psi_supported_s15": CorpusDomain(
        "psi_supported_s15", lambda: PsiSupported(1.5), True, False, True,
        False,
        "Envelope exponent s=1.5 >= 1: flat point too flat, shell integral "
        "diverges."),
    "ball_lens": CorpusDomain(
        "ball_lens", _ball_lens, True, True, True, False,
        "Intersection of two overlapping unit balls (shifted centers)."),
    "ball_box": CorpusDomain(
        "ball_box", _ball_box, True, False, True, False,
        "Ball clipped by a polydisk-like halfspace box; the flat faces "
        "carry fixed-size analytic disks near their centers."),
}


@dataclass
class CorpusMap:
    name: str
    factory: object
    domain: str
    expected: str          # Compact | Wolff
    wolff_point: object
    notes: str

    def build(self) -> SelfMap:
        return self.factory()


MAPS = {
    "rotation": CorpusMap(
        "rotation", lambda: rotation_map(math.pi / 2), "unit_disk",
        "Compact", None, "z -> i z; 4-periodic orbits."),
    "disk_hyperbolic": CorpusMap(
        "disk_hyperbolic", lambda: disk_automorphism(0.5), "unit_disk",
        "Wolff", [1.0], "(z + 1/2)/(1 + z/2); attracting fixed point +1 "
        "with multiplier 1/3, repelling at -1."),
    "disk_contraction": CorpusMap(
        "disk_contraction", lambda: scaling_map([0.5]), "unit_disk",
        "Compact", None, "z -> z/2; interior fixed point 0."),
    "ball_boundary_contraction": CorpusMap(
        "ball_boundary_contraction", ball_boundary_contraction,
        "unit_ball_2", "Wolff", [1.0, 0.0],
        "((1+z1)/2, z2/2); boundary fixed point (1, 0)."),
}


def corpus_listing() -> str:
    lines = ["domains:"]
    for d in DOMAINS.values():
        tags = (f"convex={d.convex} goldilocks_expected={d.goldilocks_expected}"
                f" taut={d.taut_documented} complete={d.complete_documented}")
        lines.append(f"  {d.name:22s} {tags}")
        lines.append(f"  {'':22s}   {d.notes}")
    lines.append("maps:")
    for m in MAPS.values():
        tgt = "" if m.wolff_point is None else f" -> {m.wolff_point}"
        lines.append(f"  {m.name:22s} on {m.domain}: expected {m.expected}{tgt}")
        lines.append(f"  {'':22s}   {m.notes}")
    return "\n".join(lines)
