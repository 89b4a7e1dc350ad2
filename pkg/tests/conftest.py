import numpy as np
import pytest

from turingcl.amplitude import amplitude_coefficients
from turingcl.io import load_model
from turingcl.pdecheck import WaveProblem, newton_wave
from turingcl.spectral import find_critical


class Bundle:
    def __init__(self, name):
        self.sym, self.spec = load_model(name)
        self.crit = find_critical(self.sym)
        self.co, self.psi = amplitude_coefficients(self.sym, self.crit, self.spec)

    @property
    def problem(self):
        return WaveProblem(self.sym, self.spec, self.crit, self.co, self.psi)


@pytest.fixture(scope="session")
def example():
    return Bundle("example_so2.json")


@pytest.fixture(scope="session")
def sh():
    return Bundle("swift_hohenberg_o2.json")


@pytest.fixture(scope="session")
def waves(example):
    prob = example.problem
    return {eps: newton_wave(prob, eps, 0.0, M=32, tol=1e-14) for eps in (0.05, 0.025)}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
