"""Shipped example systems, defined in the config DSL."""

from .config import parse_system_config

# h(x) = 0.5 x; reduced map x -> (1 - 0.5 mu) x; boundary layer y -> 0.5 y
LIN1_CONFIG = """\
name = LIN1
n_x = 1
m_z = 1
mu = 0.1
f1 = -w1
g1 = 0.25*x1 + 0.5*z1 + w1
domain_x = -2, 2
domain_z = -2, 2
"""

# saturating fast dynamics; h has no closed form
SAT1_CONFIG = """\
name = SAT1
n_x = 1
m_z = 1
mu = 0.1
f1 = -w1
g1 = 0.5*tanh(z1) + 0.25*x1 + w1
domain_x = -2, 2
domain_z = -2, 2
"""

BUILTIN_CONFIGS = {"LIN1": LIN1_CONFIG, "SAT1": SAT1_CONFIG}


def builtin_system(name, mu=None):
    try:
        text = BUILTIN_CONFIGS[name.upper()]
    except KeyError:
        raise KeyError(f"no built-in system {name!r}; choose from {sorted(BUILTIN_CONFIGS)}") from None
    sys = parse_system_config(text)
    return sys if mu is None else sys.with_mu(mu)
