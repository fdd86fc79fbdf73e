import numpy as np
import pytest

from binalloc import Instance, build_graph


@pytest.fixture
def two_agent():
    """2-D instance with incremental costs (2,1), outputs (3,1), target 2.8."""
    return Instance(
        quad=[-10.0, -10.0],
        center=[0.7, 0.6],
        passive=[0.0, 0.0],
        output=[3.0, 1.0],
        penalty=4.0,
        target=2.8,
    )


@pytest.fixture
def pair_graph():
    return build_graph(2, [(0, 1)])


@pytest.fixture
def bench_small():
    """Factory for small instances drawn from the benchmark distribution."""

    def make(n=10, seed=0):
        from binalloc import random_instance

        return random_instance(n, seed, p_ref=30.0 * n, gamma=1.0)

    return make


@pytest.fixture
def symmetric_instance():
    """All agents identical, target half the total output: near-saddle start."""

    def make(n=10, incr=0.5):
        from binalloc import fit_coefficients
        from binalloc.instances import default_quad

        p = np.ones(n)
        a = default_quad(p, 1.0, temp=1.0, time_const=0.1)
        a, b, d = fit_coefficients(np.full(n, incr), a, np.zeros(n))
        return Instance(
            quad=a, center=b, passive=d, output=p, penalty=1.0, target=n / 2
        )

    return make
