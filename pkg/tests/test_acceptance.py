"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line, collected in the
terminal summary.  Runtime budgets are asserted where one is stated.
"""
import time

import pytest

from nskorteweg import experiments as ex

from conftest import ACCEPTANCE_LINES


def _run(number, title, fn, budget=None):
    start = time.perf_counter()
    records = fn()
    elapsed = time.perf_counter() - start
    ok = all(r["pass"] for r in records)
    if budget is not None:
        ok = ok and elapsed <= budget
    worst = "; ".join(f"{r['check']}={r['value']:.4g}" for r in records[:4])
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} ({worst}; {elapsed:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    failed = [r for r in records if not r["pass"]]
    assert not failed, failed
    if budget is not None:
        assert elapsed <= budget, f"runtime {elapsed:.1f}s exceeds {budget}s"


def test_criterion_01_green_oracle():
    _run(1, "Green matrix vs RK4", ex.check_green_oracle, budget=60)


def test_criterion_02_degenerate_crossing():
    _run(2, "crossing radius vs contour", ex.check_crossing)


def test_criterion_03_characteristic_ode():
    _run(3, "characteristic ODE residual", ex.check_characteristic_ode)


def test_criterion_04_transverse_decoupling():
    _run(4, "transverse heat decoupling", ex.check_transverse)


def test_criterion_05_low_frequency_decay():
    _run(5, "low-frequency decay slope", ex.check_lowfreq_decay, budget=300)


def test_criterion_06_band_decay():
    _run(6, "medium/high band decay", ex.check_band_decay)


def test_criterion_07_nonlinear_solver():
    _run(7, "ETD2 solver", ex.check_solver)


def test_criterion_08_picard_contraction():
    _run(8, "Picard contraction", ex.check_picard)


def test_criterion_09_thermodynamics():
    _run(9, "pressure laws and phases", ex.check_thermo)


def test_criterion_10_regime_guards():
    _run(10, "regime guards", ex.check_regime)


def test_criterion_11_bernstein():
    _run(11, "Bernstein ratios", ex.check_bernstein)
