import random

import pytest
from hypothesis import HealthCheck, settings

from normtori import io
from normtori.groups import group_from_generators, is_transitive

settings.register_profile("suite", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")


_cache = {}


def group(label):
    if label not in _cache:
        _cache[label] = io.bundled_group(label).group()
    return _cache[label]


def small_corpus():
    return [(gf.label, gf) for gf in io.bundled("small_transitive.grp")]


def random_transitive_groups(count=20, seed=20240617, max_order=120):
    """Transitive groups generated by two random permutations of degree 3..6."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(3, 6)
        gens = []
        for _ in range(2):
            p = list(range(n))
            rng.shuffle(p)
            gens.append(tuple(p))
        try:
            G = group_from_generators(n, gens, max_order=max_order)
        except Exception:
            continue
        if G.order > 1 and is_transitive(G):
            out.append((f"random{len(out)}", G))
    return out


@pytest.fixture(scope="session")
def g178():
    return group("16T178")


@pytest.fixture(scope="session")
def g708():
    return group("16T708")
