import numpy as np
import pytest

from switchbif import (IntegratorConfig, LambdaPoly, SwitchedSystem,
                       SystemParams, paper_example_config)


def make_params(a, b, c, domain=(-1.0, 1.0)):
    """Constant-coefficient system parameters."""
    return SystemParams(a=a, b=LambdaPoly.constant(b), c=LambdaPoly.constant(c),
                        lambda_domain=domain)


def make_linear_system(a, b, c, domain=(-1.0, 1.0)):
    return SwitchedSystem.linear(make_params(a, b, c, domain))


def rk4_integrate(f, x0, t_final, n_steps=4000):
    """Fixed-step classical RK4; independent oracle for the closed-form flow."""
    x = np.asarray(x0, dtype=float)
    dt = t_final / n_steps
    for _ in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


@pytest.fixture(scope="session")
def paper_config():
    return paper_example_config()


@pytest.fixture(scope="session")
def paper_system(paper_config):
    return paper_config.system


@pytest.fixture(scope="session")
def paper_params(paper_system):
    return paper_system.params


@pytest.fixture(scope="session")
def cfg():
    return IntegratorConfig()
