import pytest
from flask_app import app
from groups import build_model
from models.group import FreeGroup, FreeProduct, RightAngledCoxeter, UniversalCoxeter
from states import free_product_state, length_state


@pytest.fixture
def client():
    """
    Creates a test client for the Flask app

    Sets up the Flask application in testing mode; the API keeps no
    state between requests so nothing needs tearing down

    Returns:
        Flask test client: A test client that can be used to simulate
        requests to the application during testing.
    """
    app.config["TESTING"] = True
    app.config["SERVER_NAME"] = "localhost"
    app.config["APPLICATION_ROOT"] = "/"
    app.config["PREFERRED_URL_SCHEME"] = "http"

    with app.app_context():
        with app.test_client() as client:
            yield client


@pytest.fixture
def free2():
    return FreeGroup(2)


@pytest.fixture
def free3():
    return FreeGroup(3)


@pytest.fixture
def coxeter3():
    return UniversalCoxeter(3)


@pytest.fixture
def path_racg():
    """Right-angled Coxeter group of the path 0 - 1 - 2"""
    return build_model({"kind": "right_angled_coxeter", "rank": 3, "edges": [[0, 1], [1, 2]]})


@pytest.fixture
def z_star_z():
    """Z * Z, which is Free(2) written as a free product"""
    return FreeProduct((FreeGroup(1), FreeGroup(1)))


@pytest.fixture
def z_star_z_state(z_star_z):
    """psi(n) = exp(-|n|) on each Z factor"""
    return free_product_state(
        z_star_z, [length_state(factor, 1.0) for factor in z_star_z.factors]
    )
