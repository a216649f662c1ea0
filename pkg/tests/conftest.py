import numpy as np
import pytest

from fracdelay import TimeFunctionTable, validate_system

FIXTURES = __file__.rsplit("/", 1)[0] + "/fixtures"


def scalar_problem(alpha, a0, a1=None, r1=1.0, phi0=1.0, at0=0.0, b=None,
                   zero_delays=False, control=None):
    """Scalar test system with optional single delay and constant data."""
    if zero_delays:
        delays = [0.0, 0.0]
        A = [np.array([[a0]]), np.array([[a1]])]
    elif a1 is None:
        delays = [0.0]
        A = [np.array([[a0]])]
    else:
        delays = [0.0, r1]
        A = [np.array([[a0]]), np.array([[a1]])]
    h = delays[-1]
    phi = [TimeFunctionTable(np.array([-h if h > 0 else 0.0]),
                             np.array([[phi0]]), "const")]
    A_tilde = [np.array([[at0]])] + [np.array([[0.0]])] * (len(A) - 1)
    B = np.array([[b]]) if b is not None else None
    return validate_system(alpha, delays, A, A_tilde, B, phi, control=control)


def random_stable_matrix(rng, n, mu_range=(0.2, 2.0), mix=0.15):
    """Diagonalizable stability matrix with real negative eigenvalues."""
    mu = -rng.uniform(*mu_range, n)
    V = np.linalg.qr(rng.normal(size=(n, n)))[0] + mix * rng.normal(size=(n, n))
    return V @ np.diag(mu) @ np.linalg.inv(V)


def const_phi(vec, h):
    vec = np.atleast_1d(np.asarray(vec, dtype=float))
    return TimeFunctionTable(np.array([-h if h > 0 else 0.0]), vec[None, :],
                             "const")


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
