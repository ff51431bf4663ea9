import pytest
from fastapi.testclient import TestClient
from pathlib import Path
import numpy as np

from app.main import app
from app.models.riccati import Tolerance
from app.services import popov
from app.services.riccati_service import RiccatiService
from app.utils import documents, linalg

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def load_example(name: str):
    document = documents.load_triple(DATA_DIR / name)
    return documents.to_triple(document, Tolerance())


def make_random_triple(rng, n: int, m: int, r_singular: bool = False, a0_singular: bool = False):
    """Random triple with PSD Popov matrix and prescribed singularity of R and A0"""
    C = rng.standard_normal((n + m, n + m))
    if r_singular and m > 0:
        C[:, n] = 0.0
    popov_matrix = C.T @ C
    Q, S, R = popov_matrix[:n, :n], popov_matrix[:n, n:], popov_matrix[n:, n:]
    A0 = rng.standard_normal((n, n))
    if a0_singular and n > 0:
        A0[:, 0] = 0.0
    B = rng.standard_normal((n, m))
    A = A0 + B @ linalg.pinv(R) @ S.T
    return popov.new_triple(A, B, Q, R, S)


def make_random_orthogonal(rng, n: int) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q


@pytest.fixture
def test_client():
    return TestClient(app)


@pytest.fixture
def service():
    return RiccatiService()


@pytest.fixture
def tol():
    return Tolerance()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def example1():
    return load_example("example1.json")


@pytest.fixture
def example2():
    return load_example("example2.json")


@pytest.fixture
def remark_triple():
    return load_example("remark.json")


@pytest.fixture
def scalar_dare():
    return load_example("scalar_dare.json")


@pytest.fixture
def identity_r_triple():
    return load_example("identity_r.json")


@pytest.fixture
def printed_u_example1():
    return np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@pytest.fixture
def printed_u_example2():
    return np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


@pytest.fixture
def printed_v_remark():
    s = 1.0 / np.sqrt(2.0)
    return np.array([[-s, 0.0, -s], [-s, 0.0, s], [0.0, 1.0, 0.0]])
