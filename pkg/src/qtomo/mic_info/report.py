from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class BoundReport:
    """One inequality (or identity) with every term named.

    ``relation`` is ``"le"`` (lhs <= rhs), ``"ge"`` or ``"eq"``. The verdict
    allows ``rtol * |rhs| + atol`` of slack.
    """

    name: str
    lhs: float
    rhs: float
    relation: str = "le"
    rtol: float = 0.0
    atol: float = 0.0
    terms: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        # rtol = 0 must not touch rhs: exact integer reports may exceed float range
        return self.rtol * abs(self.rhs) + self.atol if self.rtol else self.atol

    @property
    def verdict(self) -> bool:
        if self.relation == "le":
            return self.lhs <= self.rhs + self.slack
        if self.relation == "ge":
            return self.lhs >= self.rhs - self.slack
        if self.relation == "eq":
            return abs(self.lhs - self.rhs) <= self.slack
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, int) and abs(v) > 2 ** 53:
                return str(v)
            if hasattr(v, "item"):
                return v.item()
            return v
        return {"name": self.name, "lhs": plain(self.lhs), "rhs": plain(self.rhs),
                "relation": self.relation, "rtol": self.rtol, "atol": self.atol,
                "verdict": self.verdict,
                "terms": {k: plain(v) if not isinstance(v, (list, dict)) else v
                          for k, v in self.terms.items()}}
