import sys

import numpy as np
import pytest

from fpdsynth import linalg
from fpdsynth.engine import build_fpd_network, default_grid, sparameters
from fpdsynth.prototype import GValues, coupling_plan

F0 = 2.6e9
FBW = 0.03
REF_G = GValues((1.0, 0.8516, 1.1032, 0.8516, 1.0))


@pytest.fixture(params=linalg.BACKENDS)
def backend(request):
    """Run a test once per available solver backend."""
    prev = linalg.get_backend()
    linalg.set_backend(request.param)
    yield request.param
    linalg.set_backend(prev)


@pytest.fixture
def ref_plan():
    plan = coupling_plan(REF_G, FBW, [1, 2, 4])
    return plan


@pytest.fixture
def ref_net(ref_plan):
    return build_fpd_network(ref_plan, F0)


@pytest.fixture
def ref_sweep(ref_net):
    return sparameters(ref_net, default_grid(F0))


def random_tree_network(rng, n_max=8, ports_max=4):
    """Random lossless network: a random tree plus up to two cross couplings."""
    from fpdsynth.engine import CouplingNetwork, Port

    n = int(rng.integers(1, n_max + 1))
    M = np.zeros((n, n))
    for j in range(1, n):
        i = int(rng.integers(0, j))
        M[i, j] = M[j, i] = rng.uniform(-0.08, 0.08)
    for _ in range(int(rng.integers(0, 3))):
        i, j = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
        if i != j:
            M[i, j] = M[j, i] = rng.uniform(-0.03, 0.03)
    nports = int(rng.integers(1, min(n, ports_max) + 1))
    res = rng.choice(n, nports, replace=False)
    fbw = rng.uniform(0.01, 0.1)
    ports = [Port(int(e), float(rng.uniform(0.2, 3.0))) for e in res]
    return CouplingNetwork(M, ports, F0, fbw)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail, secs) in mod.RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail} [{secs:.2f} s]")
