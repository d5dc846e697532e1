import math

import pytest

import opx


def test_semicircle():
    eq = opx.solve_equilibrium("gue", 1.0)
    assert eq.alpha == pytest.approx(-math.sqrt(2), abs=1e-12)
    assert eq.beta == pytest.approx(math.sqrt(2), abs=1e-12)
    assert eq.psi(0.0) == pytest.approx(math.sqrt(2) / math.pi, abs=1e-12)
    assert eq.ell == pytest.approx(-1 - math.log(2), abs=1e-10)
    assert eq.verify_conditions()["all"]
    lam, w = opx.edge_scales(eq)
    assert lam == pytest.approx(2 ** 0.75, abs=1e-10)
    assert w == pytest.approx(math.sqrt(2), abs=1e-10)


def test_recurrence_hermite():
    r = opx.recurrence("gue", 40, 20)
    for k, b in enumerate(r["b"], start=1):
        assert b == pytest.approx(math.sqrt(k / 80), abs=1e-12)
    assert r["gram_residual"] < 1e-12


def test_special_functions():
    ai, aip = opx.airy(0)
    assert ai.real == pytest.approx(0.3550280538878172, abs=1e-14)
    assert aip.real == pytest.approx(-0.2588194037928068, abs=1e-14)
    assert opx.sine_kernel(0.3, 0.3) == pytest.approx(1.0)
    assert opx.bump(0.5) == pytest.approx(0.79139147, abs=1e-8)


def test_leading_terms():
    eq = opx.solve_equilibrium("gue")
    a11, a21, ls = opx.bulk_axis(eq, 32, 0.0)
    assert a11.real == pytest.approx(math.sqrt(2), abs=1e-12)
    a11, _, _ = opx.edge_poly(eq, 48, 0.0)
    assert a11.real > 0


def test_errors():
    with pytest.raises(opx.ValidationError):
        opx.solve_equilibrium("nope")
    with pytest.raises(ValueError):
        opx.solve_equilibrium("gue").psi(3.0)


def test_statphase_identity():
    r = opx.statphase("cubic", [100])
    assert r["max_residual"] < 1e-8


def test_cli():
    code, out, _ = opx.run_cli(["equilibrium", "--field", "gue", "--c", "1"])
    assert code == 0
    assert '"alpha": -1.414213562373095' in out
    assert opx.run_cli(["badcmd"])[0] == 2
