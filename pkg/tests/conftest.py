import numpy as np
import pytest

from mmsverify.constitutive import REFERENCE_MATERIAL
from mmsverify.manufactured import REFERENCE_FIELD


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def params():
    return REFERENCE_MATERIAL


@pytest.fixture
def field():
    return REFERENCE_FIELD


def random_rotation(rng, size=None):
    """Uniformly distributed proper rotations via QR of Gaussian matrices."""
    shape = () if size is None else (size,)
    A = rng.standard_normal(shape + (3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[..., None, :]
    flip = np.linalg.det(Q) < 0
    Q[flip, :, 0] *= -1
    return Q


def random_deformation(rng, size, scale=0.15):
    """Deformation gradients near identity with det F comfortably positive."""
    return np.eye(3) + scale * rng.uniform(-1, 1, (size, 3, 3))


def random_spd(rng, size, gap=None):
    """Symmetric positive definite matrices; with ``gap`` the eigenvalues are separated."""
    Q = random_rotation(rng, size)
    if gap is None:
        w = rng.uniform(0.5, 2.0, (size, 3))
    else:
        base = rng.uniform(0.5, 1.0, (size, 1))
        w = base + gap * np.array([0.0, 1.0, 2.0]) + rng.uniform(0, 0.5 * gap, (size, 3))
    return np.einsum('...ij,...j,...kj->...ik', Q, w, Q)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion lines after the test run."""
    acceptance = __import__("sys").modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
