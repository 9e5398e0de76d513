import pytest


def approx(expected, rel=None, abs=0.0):
    """pytest.approx without the implicit 1e-12 absolute slack (SI values are tiny)."""
    return pytest.approx(expected, rel=rel, abs=abs)
