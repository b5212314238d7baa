"""Permutations in cycle notation and a deterministic Schreier-Sims.

Internally a permutation of degree n is a tuple of 0-based images.  Products
compose left to right: (a*b)(i) = b(a(i)), i.e. points are acted on from the
right as in cycle-notation transcripts.  Files and printed output use
1-based points.
"""
from __future__ import annotations

import re

Perm = tuple[int, ...]


class CycleError(ValueError):
    """Malformed cycle notation."""


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Perm:
    """Parse "(1,2)(3,4,5)" (1-based) into an image tuple of the given degree.

    Overlapping cycles are composed, so "(1,2)(2,3)" is the product (1,3,2).
    """
    s = text.strip()
    if s in ("", "()"):
        return tuple(range(degree))
    pos = 0
    img = list(range(degree))
    for m in _CYCLE.finditer(s):
        if s[pos:m.start()].strip():
            raise CycleError(f"unexpected text {s[pos:m.start()]!r} in {text!r}")
        pos = m.end()
        body = m.group(1).strip()
        if not body:
            continue
        try:
            pts = [int(x) for x in body.split(",")]
        except ValueError:
            raise CycleError(f"non-integer point in cycle ({body})") from None
        for x in pts:
            if not 1 <= x <= degree:
                raise CycleError(f"point {x} out of range 1..{degree}")
        if len(set(pts)) != len(pts):
            raise CycleError(f"duplicate point in cycle ({body})")
        c = list(range(degree))
        for a, b in zip(pts, pts[1:] + pts[:1]):
            c[a - 1] = b - 1
        # juxtaposed cycles multiply left to right
        img = [c[i] for i in img]
    if s[pos:].strip():
        raise CycleError(f"unexpected text {s[pos:]!r} in {text!r}")
    return tuple(img)


def format_cycles(p: Perm) -> str:
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = p[j]
        out.append("(" + ",".join(str(x + 1) for x in cyc) + ")")
    return "".join(out) or "()"


def mul(a: Perm, b: Perm) -> Perm:
    return tuple(b[x] for x in a)


def inverse(a: Perm) -> Perm:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def identity(n: int) -> Perm:
    return tuple(range(n))


def cycle(points, degree: int) -> Perm:
    """Permutation from a 0-based cycle."""
    img = list(range(degree))
    pts = list(points)
    for a, b in zip(pts, pts[1:] + pts[:1]):
        img[a] = b
    return tuple(img)


class StabChain:
    """Base and strong generating set built by deterministic Schreier-Sims."""

    def __init__(self, degree: int, gens):
        self.degree = degree
        self.ident = identity(degree)
        self.base: list[int] = []
        self.strong: list[Perm] = []
        self.orbits: list[dict[int, Perm]] = []
        for g in gens:
            if g != self.ident and g not in self.strong:
                self.strong.append(g)
        if self.strong:
            self._extend_base(self.strong[0])
            self._build()

    def _extend_base(self, h: Perm) -> None:
        moved = next(i for i in range(self.degree) if h[i] != i)
        self.base.append(moved)
        self.orbits.append({})

    def _level_gens(self, i: int) -> list[Perm]:
        fix = self.base[:i]
        return [s for s in self.strong if all(s[b] == b for b in fix)]

    def _orbit(self, i: int) -> None:
        b = self.base[i]
        trans = {b: self.ident}
        queue = [b]
        gens = self._level_gens(i)
        for x in queue:
            for g in gens:
                y = g[x]
                if y not in trans:
                    trans[y] = mul(trans[x], g)
                    queue.append(y)
        self.orbits[i] = trans

    def sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        for level in range(start, len(self.base)):
            t = self.orbits[level].get(g[self.base[level]])
            if t is None:
                return g, level
            g = mul(g, inverse(t))
        return g, len(self.base)

    def _build(self) -> None:
        for i in range(len(self.base)):
            self._orbit(i)
        i = len(self.base) - 1
        while i >= 0:
            restart = None
            gens = self._level_gens(i)
            for x, tx in list(self.orbits[i].items()):
                for s in gens:
                    y = s[x]
                    g = mul(mul(tx, s), inverse(self.orbits[i][y]))
                    if g == self.ident:
                        continue
                    h, j = self.sift(g, i + 1)
                    if h == self.ident:
                        continue
                    self.strong.append(h)
                    if j == len(self.base):
                        self._extend_base(h)
                    for l in range(i + 1, j + 1):
                        self._orbit(l)
                    restart = j
                    break
                if restart is not None:
                    break
            if restart is None:
                i -= 1
            else:
                i = restart

    def order(self) -> int:
        n = 1
        for o in self.orbits:
            n *= len(o)
        return n

    def contains(self, g: Perm) -> bool:
        h, lev = self.sift(g)
        return lev == len(self.base) and h == self.ident
