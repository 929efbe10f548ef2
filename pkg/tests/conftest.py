import functools
from types import SimpleNamespace

import numpy as np
import pytest

from holosplit import (
    LambdaParams,
    build_section,
    case_setup,
    propagate_frame,
    separability_report,
)
from holosplit.dynamics import TimeGrid

SQRT3 = np.sqrt(3.0)


@functools.lru_cache(maxsize=32)
def _run_case_cached(which, omega0, delta, tau, eta, omega1, omega2, steps):
    p = LambdaParams(omega0=omega0, delta=delta, tau=tau,
                     omega1=omega1, omega2=omega2, eta=eta)
    spec, psi0, rule = case_setup(which, p)
    grid = TimeGrid.uniform(p.tau, steps)
    schrod = propagate_frame(spec, psi0, grid)
    section = build_section(rule, schrod, spec)
    report = separability_report(section, schrod, spec)
    return SimpleNamespace(params=p, spec=spec, psi0=psi0, rule=rule, grid=grid,
                           schrod=schrod, section=section, report=report)


def run_case(which, omega0=SQRT3, delta=1.0, tau=np.pi / 2, eta=np.pi / 3,
             omega1=1.0 + 0j, omega2=0.0 + 0j, steps=4096):
    """Full pipeline for a Lambda case; memoized across the whole session."""
    return _run_case_cached(which, float(omega0), float(delta), float(tau),
                            float(eta), complex(omega1), complex(omega2), int(steps))


@pytest.fixture(scope="session")
def case_i():
    return run_case("i")


@pytest.fixture(scope="session")
def case_i_resonant():
    return run_case("i", omega0=1.0, delta=0.0, tau=np.pi)


@pytest.fixture(scope="session")
def case_ii():
    return run_case("ii")


@pytest.fixture(scope="session")
def case_iii():
    return run_case("iii")
