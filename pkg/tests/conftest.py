"""Shared fixture categories, built by hand so tests stay independent
of the corpus generator they are meant to check."""

from __future__ import annotations

import pytest

from toposkit.fincat import FinCategory, make_category, poset_category


def diamond() -> FinCategory:
    """Poset bot < a, b < top with a, b incomparable."""
    return poset_category(
        "diamond", ["bot", "a", "b", "top"],
        [("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
    )


def chain(n: int) -> FinCategory:
    objs = [f"c{i}" for i in range(n)]
    return poset_category(f"chain{n}", objs, [(objs[i], objs[i + 1]) for i in range(n - 1)])


def discrete2() -> FinCategory:
    return make_category("disc2", ["l", "r"])


def z2_group() -> FinCategory:
    """One object, one involution: s.s = id."""
    return make_category("z2", ["*"], [("s", "*", "*")], {("s", "s"): "id_*"})


def walking_idempotent() -> FinCategory:
    return make_category("idem", ["e"], [("e2", "e", "e")], {("e2", "e2"): "e2"})


def parallel_arrows() -> FinCategory:
    return make_category("pp", ["x", "y"], [("u", "x", "y"), ("v", "x", "y")], {})


@pytest.fixture
def diamond_cat() -> FinCategory:
    return diamond()
