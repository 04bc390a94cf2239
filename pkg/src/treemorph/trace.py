"""Step-counted transformation traces and their independent replay."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .geom import PointSet
from .moves import (AnyMove, Kind, Move, MoveError, SimMove, apply_move,
                    apply_sim, check_packing, move_from_dict, sim_move_valid)
from .tree import (AnyTree, LabeledPlaneTree, TreeError, canonical_key,
                   tree_from_json)


@dataclass
class Trace:
    initial: AnyTree
    steps: list[AnyMove] = field(default_factory=list)
    claimed_bound: int | float = 0
    theorem_tag: str = ""

    def __len__(self) -> int:
        return len(self.steps)

    def trees(self) -> list[AnyTree]:
        """Replay without checks; initial tree first."""
        out = [self.initial]
        for s in self.steps:
            cur = out[-1]
            if isinstance(s, Move):
                out.append(cur.replace(s.removed, s.inserted))
            else:
                out.append(apply_sim(cur, s))
        return out

    @property
    def final(self) -> AnyTree:
        return self.trees()[-1]

    def to_json(self) -> str:
        steps = []
        for s in self.steps:
            d = s.to_dict()
            if isinstance(s, SimMove):
                d["sim"] = True
            steps.append(d)
        return json.dumps({"initial": json.loads(self.initial.to_json()),
                           "theorem": self.theorem_tag,
                           "bound": str(self.claimed_bound),
                           "steps": steps}, sort_keys=True)

    @classmethod
    def from_json(cls, ps: PointSet, text: str) -> "Trace":
        doc = json.loads(text)
        init = tree_from_json(ps, json.dumps(doc["initial"]))
        bound = doc.get("bound", 0)
        bound = float(bound) if "." in str(bound) else int(bound)
        return cls(init, [move_from_dict(s) for s in doc["steps"]], bound,
                   doc.get("theorem", ""))


@dataclass
class Verdict:
    ok: bool
    index: int | None = None
    reason: str = ""
    final: AnyTree | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_trace(tr: Trace, target: AnyTree | None = None) -> Verdict:
    """Replay every step with full validation.

    Single moves must reach their claimed kind; simultaneous moves must
    satisfy their claimed kind under the given bijection.  The step count
    must respect the claimed bound and, when given, the last tree must
    equal ``target``.
    """
    cur = tr.initial
    n = cur.n
    for i, s in enumerate(tr.steps):
        try:
            if isinstance(s, Move):
                cur = apply_move(cur, s)
            else:
                if not sim_move_valid(cur, s):
                    return Verdict(False, i, f"simultaneous {s.kind.value} "
                                   "condition fails", cur)
                check_packing(s, n)
                cur = apply_sim(cur, s)
        except (MoveError, TreeError) as exc:
            return Verdict(False, i, str(exc), cur)
        except AssertionError as exc:
            return Verdict(False, i, f"assertion: {exc}", cur)
    if len(tr.steps) > tr.claimed_bound:
        return Verdict(False, len(tr.steps),
                       f"{len(tr.steps)} steps exceed bound {tr.claimed_bound}",
                       cur)
    if target is not None and canonical_key(cur) != canonical_key(target):
        return Verdict(False, len(tr.steps), "final tree differs from target",
                       cur)
    return Verdict(True, None, "", cur)
