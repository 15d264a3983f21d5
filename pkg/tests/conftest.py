import pytest

from lowlight_va import SimulationConfig, generate_synthetic_profile
from lowlight_va.profile import Configuration, EnhancementLadder, QualityLadder, SystemProfile

_CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, ok in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {text}")


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def record(cid, text, ok):
        _CRITERIA.append((cid, text, bool(ok)))
        print(f"{'PASS' if ok else 'FAIL'} {cid}: {text}")
        assert ok, f"{cid} failed: {text}"

    return record


@pytest.fixture(scope="session")
def default_profile():
    return generate_synthetic_profile()


@pytest.fixture
def sim():
    return SimulationConfig()


def grid_profile(accuracy, datasize_bits=None, flops=None, encode=None, decode=None, qps=None, ratios=None):
    """Small hand-built profile; unspecified tables default to zero-latency values."""
    m, n1 = len(accuracy), len(accuracy[0])
    qps = qps or tuple(range(10, 10 + 5 * m, 5))
    ratios = ratios or tuple(j / max(1, n1 - 1) for j in range(n1))
    return SystemProfile(
        quality=QualityLadder(tuple(qps)),
        enhancement=EnhancementLadder(tuple(ratios)),
        accuracy=accuracy,
        datasize_bits=datasize_bits or [float(m - i) for i in range(m)],
        flops_per_frame=flops or [0.0] * n1,
        encode_latency_s=encode or [0.0] * m,
        decode_latency_s=decode or [0.0] * m,
    )


def cfg(i, j):
    return Configuration(i, j)
