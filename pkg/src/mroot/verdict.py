"""Outcome records for the condition checkers."""
from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, UNDECIDABLE = "pass", "fail", "undecidable"


@dataclass
class Item:
    name: str
    status: str
    detail: str = ""
    residual: object = None  # AExpr / UExpr / RatFn or None

    @property
    def ok(self):
        return self.status == PASS


@dataclass
class CheckVerdict:
    """Named sub-checks plus witnesses and notes.

    ``status`` is the combined outcome: any undecidable item makes the whole
    verdict undecidable, otherwise any failure makes it fail.
    """

    title: str
    items: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add(self, name, status, detail="", residual=None):
        if isinstance(status, bool):
            status = PASS if status else FAIL
        self.items.append(Item(name, status, detail, residual))
        return self.items[-1]

    def note(self, text):
        self.notes.append(text)

    @property
    def status(self):
        st = [i.status for i in self.items]
        if UNDECIDABLE in st:
            return UNDECIDABLE
        if FAIL in st:
            return FAIL
        return PASS

    @property
    def passed(self):
        return self.status == PASS

    def __bool__(self):
        return self.passed

    def item(self, name) -> Item:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def render(self, residuals: bool = True) -> str:
        lines = [f"== {self.title}: {self.status.upper()}"]
        for it in self.items:
            line = f"  [{it.status}] {it.name}"
            if it.detail:
                line += f": {it.detail}"
            lines.append(line)
            if residuals and it.residual is not None and it.status != PASS:
                lines.extend("      " + r for r in residual_table(it.residual))
        for k in sorted(self.witnesses):
            lines.append(f"  witness {k} = {self.witnesses[k]}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def residual_table(expr, limit: int = 400) -> list:
    """Exponent-class rows for an AExpr, UExpr or RatFn residual."""
    from .aexpr import AExpr
    from .upsilon import UExpr
    from .polyalg import RatFn

    def clip(s):
        return s if len(s) <= limit else s[:limit] + " ..."

    if isinstance(expr, UExpr):
        return [f"{part} class {e}: {clip(r.render())}" for part, e, r in expr.class_table()]
    if isinstance(expr, AExpr):
        return [f"class {e}: {clip(r.render())}" for e, r in expr.decompose()]
    if isinstance(expr, RatFn):
        return [f"class 0: {clip(expr.render())}"]
    return [clip(str(expr))]
