"""Group files, the JSONL results store and the expected-values table.

Group file grammar (UTF-8, one directive per line, ``#`` starts a comment)::

    label <string>          starts a new group
    degree <int>
    gen <cycles>            1-based cycles, juxtaposed cycles multiply
    order <int>             optional, checked against the computed order
    structure <text>        optional free-form tag
    base <label>            optional: this group maps onto the group <label>
    image <cycles>          optional: image in the base group of the preceding gen
"""
from __future__ import annotations

import csv
import json
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import perm as P
from .groups import DEFAULT_MAX_ORDER, FiniteGroup, GroupHomomorphism, group_from_generators


class GroupFileError(ValueError):
    pass


@dataclass
class GroupFile:
    label: str
    degree: int
    generators: list[str]
    order: int | None = None
    structure: str = ""
    base: str | None = None
    images: list[str] = field(default_factory=list)

    def perms(self) -> list[tuple[int, ...]]:
        return [P.parse_cycles(g, self.degree) for g in self.generators]

    def group(self, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
        G = group_from_generators(self.degree, self.perms(), max_order=max_order)
        if self.order is not None and G.order != self.order:
            raise GroupFileError(f"{self.label}: declared order {self.order}, computed {G.order}")
        return G


def parse_group_text(text: str, source: str = "<string>") -> list[GroupFile]:
    out: list[GroupFile] = []
    cur: dict | None = None

    def finish():
        if cur is None:
            return
        if cur["degree"] is None:
            raise GroupFileError(f"{source}: group {cur['label']!r} has no degree line")
        if cur["images"] and len(cur["images"]) != len(cur["generators"]):
            raise GroupFileError(f"{source}: group {cur['label']!r} needs one image per generator")
        gf = GroupFile(**cur)
        for g in gf.generators:
            P.parse_cycles(g, gf.degree)
        out.append(gf)

    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition(" ")
        val = val.strip()
        if key == "label" or cur is None:
            finish()
            cur = dict(label=val if key == "label" else f"group{len(out) + 1}", degree=None,
                       generators=[], order=None, structure="", base=None, images=[])
            if key == "label":
                continue
        try:
            if key == "degree":
                cur["degree"] = int(val)
            elif key == "gen":
                if cur["degree"] is None:
                    raise GroupFileError("gen before degree")
                P.parse_cycles(val, cur["degree"])
                cur["generators"].append(val)
            elif key == "order":
                cur["order"] = int(val)
            elif key == "structure":
                cur["structure"] = val
            elif key == "base":
                cur["base"] = val
            elif key == "image":
                cur["images"].append(val)
            else:
                raise GroupFileError(f"unknown directive {key!r}")
        except (ValueError, P.CycleError) as e:
            raise GroupFileError(f"{source}:{n}: {e}") from e
    finish()
    return out


def parse_group_file(path) -> list[GroupFile]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise GroupFileError(f"cannot read {p}: {e}") from e
    return parse_group_text(text, source=str(p))


def data_path(name: str) -> Path:
    return Path(str(resources.files("normtori") / "data" / name))


def bundled(name: str) -> list[GroupFile]:
    return parse_group_file(data_path(name))


def bundled_group(label: str) -> GroupFile:
    for f in sorted(data_path("").iterdir()):
        if f.suffix == ".grp":
            for gf in parse_group_file(f):
                if gf.label == label:
                    return gf
    raise KeyError(label)


def epi_from_images(cover: FiniteGroup, cover_gens: list[int], base: FiniteGroup,
                    base_images: list[int]) -> GroupHomomorphism:
    """Extend generator images to a homomorphism by BFS; fails if ill defined."""
    T = cover.table
    img = np.full(T.n, -1, dtype=np.int64)
    img[0] = 0
    q = deque([0])
    while q:
        x = q.popleft()
        for a, b in zip(cover_gens, base_images):
            y = int(T.mul[x, a])
            v = int(base.table.mul[img[x], b])
            if img[y] < 0:
                img[y] = v
                q.append(y)
            elif img[y] != v:
                raise GroupFileError("generator images do not define a homomorphism")
    phi = GroupHomomorphism(cover, base, img)
    if not phi.is_homomorphism():
        raise GroupFileError("generator images do not define a homomorphism")
    return phi


def load_cover(cover_file: GroupFile, base_file: GroupFile, max_order: int = DEFAULT_MAX_ORDER):
    """(cover group, base group, epi) from a file with ``image`` lines."""
    base = base_file.group(max_order)
    cov = cover_file.group(max_order)
    gens = [cov.table.index_of_perm(p) for p in cover_file.perms()]
    imgs = [base.table.index_of_perm(P.parse_cycles(s, base_file.degree)) for s in cover_file.images]
    return cov, base, epi_from_images(cov, gens, base, imgs)


# ------------------------------------------------------------ results store

@dataclass
class ResultRecord:
    label: str
    operation: str
    params: dict
    payload: dict
    wall_time: float
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ResultRecord":
        return cls(**json.loads(line))


def append_records(path, records) -> None:
    p = Path(path)
    try:
        with p.open("a", encoding="utf-8") as f:
            for r in records:
                f.write(r.to_json() + "\n")
    except OSError as e:
        raise OSError(f"cannot write results to {p}: {e}") from e


def load_records(path) -> list[ResultRecord]:
    p = Path(path)
    try:
        with p.open(encoding="utf-8") as f:
            return [ResultRecord.from_json(l) for l in f if l.strip()]
    except OSError as e:
        raise OSError(f"cannot read results from {p}: {e}") from e


class Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t


# ------------------------------------------------------------ expected values

@dataclass
class Expected:
    label: str
    operation: str
    value: str
    citation: str


def load_expected(path=None) -> list[Expected]:
    p = Path(path) if path else data_path("expected.tsv")
    rows = []
    with p.open(encoding="utf-8") as f:
        for row in csv.reader((l for l in f if l.strip() and not l.startswith("#")), delimiter="\t"):
            if len(row) != 4:
                raise ValueError(f"{p}: expected 4 tab-separated columns, got {row!r}")
            rows.append(Expected(*(c.strip() for c in row)))
    return rows
