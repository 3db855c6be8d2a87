import math

import pytest

from switchbif import NoBracketError
from switchbif.rootfind import brent, expand_bracket


def test_brent_simple_root():
    x, fx = brent(lambda x: x * x - 2.0, 0.0, 2.0)
    assert x == pytest.approx(math.sqrt(2.0), abs=1e-13)
    assert abs(fx) < 1e-12


def test_brent_transcendental():
    x, _ = brent(lambda x: math.cos(x) - x, 0.0, 1.0)
    assert x == pytest.approx(0.7390851332151607, abs=1e-13)


def test_brent_endpoint_root():
    x, fx = brent(lambda x: x - 1.0, 1.0, 2.0)
    assert x == 1.0 and fx == 0.0


def test_brent_ftol_stops_early():
    calls = []

    def f(x):
        calls.append(x)
        return x ** 3 - 8.0

    x, fx = brent(f, 0.0, 5.0, ftol=1e-3)
    assert abs(fx) <= 1e-3
    assert x == pytest.approx(2.0, abs=1e-3)


def test_brent_requires_sign_change():
    with pytest.raises(NoBracketError):
        brent(lambda x: x * x + 1.0, -1.0, 1.0)


def test_brent_steep_function():
    x, _ = brent(lambda x: math.exp(40.0 * x) - 1.0, -1.0, 0.9)
    assert x == pytest.approx(0.0, abs=1e-12)


def test_expand_bracket_finds_sign_change():
    f = lambda x: (x - 2.5) * (x + 3.0)
    res = expand_bracket(f, 1.0, lo=0.0, hi=10.0)
    assert res is not None
    a, b = res
    assert f(a) * f(b) <= 0.0
    assert a <= 2.5 <= b


def test_expand_bracket_single_signed():
    assert expand_bracket(lambda x: x * x + 1.0, 1.0, lo=-5.0, hi=5.0) is None
