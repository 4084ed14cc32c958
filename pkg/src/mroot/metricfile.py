"""Line-oriented metric file format.

::

    dim 2
    root 4
    A:
    1 ; x 0 0 ; y 4 0
    1 ; x 0 0 ; y 0 4
    1 ; x 1 0 ; y 2 2

Optional blocks ``B:``, ``alpha:`` and ``beta[i]:`` (1-based ``i``) use the
same term lines.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .metric import ConformalBetaChange, GeneralizedMRoot, MetricError, MRootMetric
from .polyalg import Ring

__all__ = ["MetricFile", "MetricFileError", "parse_metric_file", "parse_metric_text"]

_BLOCK = re.compile(r"^(A|B|alpha|beta\[(\d+)\]):$")
_RAT = re.compile(r"^[+-]?\d+(/\d+)?$")


class MetricFileError(ValueError):
    """Parse failure; ``kind`` is one of syntax, homogeneity, dimension."""

    def __init__(self, kind, line, col, message):
        self.kind = kind
        self.line = line
        self.col = col
        super().__init__(f"{kind} error at line {line}, column {col}: {message}")


@dataclass
class MetricFile:
    dim: int
    root: int
    blocks: dict = field(default_factory=dict)  # name -> [(Fraction, xexp, yexp)]

    def terms(self, name):
        return self.blocks.get(name, [])

    @property
    def has_change(self):
        return any(k == "alpha" or k.startswith("beta[") for k in self.blocks)

    def _poly(self, R, name):
        return R.from_terms([(c, xe, ye) for c, xe, ye in self.terms(name)])

    def to_metric(self, name=""):
        R = Ring(self.dim)
        A = self._poly(R, "A")
        try:
            if "B" in self.blocks:
                base = GeneralizedMRoot(A, self._poly(R, "B"), self.root, name=name)
            else:
                base = MRootMetric(A, self.root, name=name)
        except MetricError as exc:
            raise MetricFileError("homogeneity", 0, 0, str(exc)) from exc
        if not self.has_change:
            return base
        alpha = self._poly(R, "alpha")
        beta = [self._poly(R, f"beta[{i + 1}]") for i in range(self.dim)]
        return ConformalBetaChange(base, alpha, beta, name=name)

    def render(self) -> str:
        out = [f"dim {self.dim}", f"root {self.root}"]
        order = ["A", "B", "alpha"] + [f"beta[{i + 1}]" for i in range(self.dim)]
        for key in order:
            if key not in self.blocks:
                continue
            out.append(f"{key}:")
            for c, xe, ye in self.blocks[key]:
                out.append(f"{c} ; x {' '.join(map(str, xe))} ; y {' '.join(map(str, ye))}")
        return "\n".join(out) + "\n"


def _exps(part, tag, n, lineno, col):
    bits = part.split()
    if not bits or bits[0] != tag:
        raise MetricFileError("syntax", lineno, col, f"expected '{tag} <e1> .. <e{n}>'")
    vals = bits[1:]
    if len(vals) != n:
        raise MetricFileError("dimension", lineno, col, f"expected {n} {tag}-exponents, got {len(vals)}")
    try:
        e = tuple(int(v) for v in vals)
    except ValueError:
        raise MetricFileError("syntax", lineno, col, "exponents must be integers") from None
    if any(v < 0 for v in e):
        raise MetricFileError("syntax", lineno, col, "exponents must be nonnegative")
    return e


def parse_metric_text(text: str) -> MetricFile:
    dim = root = None
    blocks = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        s = line.strip()
        col = indent + 1
        head = s.split()
        if head[0] in ("dim", "root"):
            if len(head) != 2 or not head[1].isdigit():
                raise MetricFileError("syntax", lineno, col, f"expected '{head[0]} <positive integer>'")
            if head[0] == "dim":
                dim = int(head[1])
                if dim < 1:
                    raise MetricFileError("dimension", lineno, col + 4, "dim must be positive")
            else:
                root = int(head[1])
            continue
        mb = _BLOCK.match(s)
        if mb:
            if dim is None or root is None:
                raise MetricFileError("syntax", lineno, col, "'dim' and 'root' must precede blocks")
            current = mb.group(1)
            if mb.group(2) is not None and not 1 <= int(mb.group(2)) <= dim:
                raise MetricFileError("dimension", lineno, col + 5, f"beta index must be in 1..{dim}")
            if current in blocks:
                raise MetricFileError("syntax", lineno, col, f"block {current} repeated")
            blocks[current] = []
            continue
        if current is None:
            raise MetricFileError("syntax", lineno, col, f"unexpected '{head[0]}'")
        parts = s.split(";")
        if len(parts) != 3:
            raise MetricFileError("syntax", lineno, col, "term lines are '<rational> ; x .. ; y ..'")
        offs = [col]
        for p in parts[:-1]:
            offs.append(offs[-1] + len(p) + 1)
        c = parts[0].strip()
        if not _RAT.match(c):
            raise MetricFileError("syntax", lineno, offs[0], f"bad rational '{c}'")
        try:
            coeff = Fraction(c)
        except ZeroDivisionError:
            raise MetricFileError("syntax", lineno, offs[0], "zero denominator") from None
        xe = _exps(parts[1], "x", dim, lineno, offs[1] + 1)
        ye = _exps(parts[2], "y", dim, lineno, offs[2] + 1)
        want = {"A": root, "B": 2}.get(current, 0)
        if sum(ye) != want:
            raise MetricFileError("homogeneity", lineno, offs[2] + 1,
                                  f"{current} terms must have y-degree {want}, got {sum(ye)}")
        blocks[current].append((coeff, xe, ye))
    if dim is None or root is None:
        raise MetricFileError("syntax", 0, 0, "missing 'dim' or 'root'")
    if not blocks.get("A"):
        raise MetricFileError("syntax", 0, 0, "missing nonempty A block")
    return MetricFile(dim, root, blocks)


def parse_metric_file(path) -> MetricFile:
    with open(path, encoding="utf-8") as fh:
        return parse_metric_text(fh.read())
