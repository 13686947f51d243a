import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from birdfm.ingest import AudioClip

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FS = 48000


def sine(freq, n=FS, amp=0.5, fs=FS, phase=0.0):
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / fs + phase)


@pytest.fixture
def tone4k():
    return AudioClip(sine(4000.0), FS, "tone4k")


@pytest.fixture(scope="session")
def mixed(tmp_path_factory):
    from birdfm.synth import mixed_corpus
    return mixed_corpus(tmp_path_factory.mktemp("mixed"), n=50, seed=0)


ACCEPTANCE = []


def record(criterion: int, passed: bool, detail: str) -> None:
    """Log one acceptance verdict; printed now and again in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
