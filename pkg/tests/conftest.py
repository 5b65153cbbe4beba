import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tesselwalk.families import complete_bipartite, even_cycle, kite_cover, kite_cover_multiedge, random_bipartite

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def suite_graphs():
    named = [
        ("kite_cover", kite_cover()),
        ("kite_multi", kite_cover_multiedge()),
        ("K33", complete_bipartite(3, 3)),
        ("K24", complete_bipartite(2, 4)),
        ("C8", even_cycle(8)),
    ]
    rng = np.random.default_rng(2024)
    for k in range(20):
        n1, n2 = (int(x) for x in rng.integers(2, 6, size=2))
        named.append((f"random{k}", random_bipartite(n1, n2, 0.4, 3, seed=1000 + k)))
    return named


SUITE = suite_graphs()


@pytest.fixture(params=SUITE[:5], ids=[name for name, _ in SUITE[:5]])
def small_graph(request):
    return request.param[1]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
