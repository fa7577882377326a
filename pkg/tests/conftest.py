import math

import numpy as np
import pytest

from chi_spt.model import builtin_system, parse_system_config

UNSTABLE_BOUNDARY = """\
name = UNSTABLE_BOUNDARY
n_x = 1
m_z = 1
mu = 0.1
f1 = -w1
g1 = 2*z1
"""

SINGULAR_MANIFOLD = """\
name = SINGULAR_MANIFOLD
n_x = 1
m_z = 1
mu = 0.1
f1 = -w1
g1 = z1
"""

# f == 0: the slow state never moves, so x and x_s coincide
FROZEN_SLOW = """\
name = FROZEN_SLOW
n_x = 1
m_z = 1
mu = 0.1
f1 = 0*w1
g1 = 0.25*x1 + 0.5*z1 + w1
"""

COUPLED2 = """\
name = COUPLED2
n_x = 2
m_z = 2
mu = 0.05
f1 = -w1 + 0.2*w2
f2 = -0.5*w2 - 0.1*sin(w1)
g1 = 0.4*tanh(z1) + 0.1*z2 + 0.2*x1 + w1
g2 = 0.3*sat(z2) - 0.1*z1 + 0.1*x2 + 0.05*x1*x2 + w2
"""


def lin1_f(w):
    return [-w[0]]


def lin1_g(x, z, w):
    return [0.25 * x[0] + 0.5 * z[0] + w[0]]


def sat1_g(x, z, w):
    return [0.5 * math.tanh(z[0]) + 0.25 * x[0] + w[0]]


@pytest.fixture
def lin1():
    return builtin_system("LIN1")


@pytest.fixture
def sat1():
    return builtin_system("SAT1")


@pytest.fixture(params=["LIN1", "SAT1"])
def builtin(request):
    return builtin_system(request.param)


@pytest.fixture
def unstable_boundary():
    return parse_system_config(UNSTABLE_BOUNDARY)


@pytest.fixture
def singular_manifold():
    return parse_system_config(SINGULAR_MANIFOLD)


@pytest.fixture
def frozen_slow():
    return parse_system_config(FROZEN_SLOW)


@pytest.fixture
def coupled2():
    return parse_system_config(COUPLED2)


# acceptance criteria register their outcome here; printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
