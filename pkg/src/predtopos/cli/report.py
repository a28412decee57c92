"""Report records and their two renderings.

The machine form is JSON with sorted keys and no timing, so identical inputs
give byte-identical output.  ``from_json(to_json(r)) == r`` for every report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

VERDICTS = ("pass", "fail", "pass-up-to-bound")
EXIT = {"pass": 0, "fail": 1, "pass-up-to-bound": 2}
INPUT_ERROR = 3


def plain(x: Any) -> Any:
    """A JSON-native copy of ``x``; anything unrecognised becomes its ``str``."""
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((plain(v) for v in x), key=repr)
    if hasattr(x, "stalks") and hasattr(x, "action"):
        return {"presheaf": x.name or "", "stalks": plain(x.stalks)}
    if hasattr(x, "comps") and hasattr(x, "dom"):
        return {"from": plain(x.dom), "to": plain(x.cod), "components": {k: {repr(a): plain(b) for a, b in v.items()} for k, v in x.comps.items()}}
    return str(x)


@dataclass
class Report:
    """``data`` holds the numbers and facts; ``provenance`` names the operation behind each data key."""

    command: str
    verdict: str
    data: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    bound: dict = field(default_factory=dict)
    timing: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        self.data = plain(self.data)
        self.witnesses = plain(self.witnesses)
        self.provenance = plain(self.provenance)
        self.bound = plain(self.bound)

    def exit_code(self, strict: bool = False) -> int:
        if strict and self.verdict == "pass-up-to-bound":
            return EXIT["fail"]
        return EXIT[self.verdict]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "data": self.data,
            "witnesses": self.witnesses,
            "provenance": self.provenance,
            "bound": self.bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(d["command"], d["verdict"], d.get("data", {}), d.get("witnesses", []), d.get("provenance", {}), d.get("bound", {}))

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.verdict}"]
        for k, v in self.data.items():
            if isinstance(v, list) and any(isinstance(x, str) and " " in x for x in v):
                lines.append(f"  {k}:")
                lines.extend(f"    {x}" for x in v)
            else:
                lines.append(f"  {k}: {_show(v)}")
        if self.bound:
            lines.append("  bounds: " + ", ".join(f"{k}={v}" for k, v in self.bound.items()))
        if self.witnesses:
            lines.append("  witnesses:")
            lines.extend(f"    - {_show(w)}" for w in self.witnesses)
        if self.provenance:
            lines.append("  computed by:")
            lines.extend(f"    {k}: {v}" for k, v in self.provenance.items())
        if self.timing is not None:
            lines.append(f"  time: {self.timing:.3f}s")
        return "\n".join(lines) + "\n"


def _show(v) -> str:
    if isinstance(v, list) and all(isinstance(x, (int, str)) for x in v):
        return " ".join(str(x) for x in v)
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, ensure_ascii=False)
    return str(v)
