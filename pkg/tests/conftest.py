import numpy as np
import pytest

from qcl.channel import ChannelBatch, SpaceKind
from qcl.sampler import sample_fiber

ALL_KINDS = list(SpaceKind)


def random_channels(kind, n, seed):
    """Channels on a spread of fibers, for property checks."""
    gen = np.random.default_rng(seed)
    parts = []
    for i in range(8):
        a = gen.uniform(0.05, 0.95)
        f = None if SpaceKind(kind).is_unital else gen.uniform(0.05, 0.95)
        parts.append(sample_fiber(kind, a, f, rng=seed * 100 + i, size=max(1, n // 8)))
    return ChannelBatch.concat(parts)


@pytest.fixture(params=ALL_KINDS, ids=lambda k: k.value)
def kind(request):
    return request.param


# -- acceptance summary --------------------------------------------------------
# test_acceptance.py records one entry per checked part; the terminal summary
# folds them into one PASS/FAIL line per criterion.

ACCEPTANCE: dict[int, dict] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    entry = ACCEPTANCE.setdefault(number, {"title": title, "parts": []})
    entry["parts"].append((bool(ok), detail))
    print(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        parts = entry["parts"]
        ok = all(p for p, _ in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {entry['title']}")
        for p, detail in parts:
            tr.write_line(f"        {'ok  ' if p else 'FAIL'} {detail}")
