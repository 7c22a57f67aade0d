"""The self-check registry: all levels green, failures attributable.

The mutation test at the bottom is the important one: it breaks the Hessian
kernel's distance attribution while preserving the d = 0 entry, and requires
the contraction checks to catch it.  That works because checks resolve
library functions through their module namespaces at call time.
"""

import json

import pytest

from parity_ising import perturbation as pt
from parity_ising import verify


def test_fast_level_is_green():
    results = verify.run_checks("fast")
    assert len(results) == 20
    assert verify.failures(results) == ()
    assert all(r.elapsed >= 0.0 for r in results)


def test_full_level_is_green():
    results = verify.run_checks("full")
    assert len(results) == 27
    assert verify.failures(results) == ()


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        verify.run_checks("paranoid")


def test_failures_filters_on_passed_flag():
    good = verify.CheckResult("a", "m", True, 1.0, 1.0, 0.1, "", 0.0)
    bad = verify.CheckResult("b", "m", False, 2.0, 1.0, 0.1, "", 0.0)
    assert verify.failures((good, bad)) == (bad,)


def test_results_serialize_to_json():
    results = verify.run_checks("fast")
    payload = json.dumps([r.as_dict() for r in results])
    rows = json.loads(payload)
    assert set(rows[0]) == {
        "name", "module", "passed", "observed", "expected",
        "tolerance", "inputs", "elapsed",
    }


def test_broken_kernel_attribution_is_caught(monkeypatch):
    # Flip the sign of every d > 0 entry: N*kernel(0) still matches the
    # Laplacian, but N*sum(kernel) no longer matches chi''.  The registry
    # must fail loudly on exactly that contraction.
    real = pt.hessian_kernel

    def broken(g_bar, n_sites):
        kernel = real(g_bar, n_sites)
        values = kernel.values.copy()
        values[1:] = -values[1:]
        return pt.HessianKernel(kernel.base_coupling, kernel.n_sites, values)

    monkeypatch.setattr(pt, "hessian_kernel", broken)
    failed = {r.name for r in verify.failures(verify.check_contractions())}
    assert failed
    assert all("sum(kernel)" in name for name in failed)
    assert any("chi_double_prime" in name for name in failed)
