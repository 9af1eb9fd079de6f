import sys
from functools import lru_cache
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@lru_cache(maxsize=None)
def certified(alpha, beta, sigma, K):
    """Density and lambda enclosures shared between test modules."""
    from noiselyap.certification import enclose_density
    from noiselyap.dynamics import NoiseParams, family_map
    from noiselyap.lyapunov import lyapunov_enclosure

    d = enclose_density(family_map(alpha, beta), NoiseParams(sigma), K)
    return d, lyapunov_enclosure(d)


ACCEPTANCE_LINES: dict[int, str] = {}


def report(criterion: int, passed: bool, detail: str) -> None:
    """Record the one-line verdict for an acceptance criterion."""
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
