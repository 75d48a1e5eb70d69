"""Acceptance criteria 1-8.

Each test prints one ``[PASS]``/``[FAIL]`` line with the measured quantity
and its tolerance, then asserts.  Run standalone with
``python3 tests/test_acceptance.py`` for just the summary lines.
"""
import io
import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hillspps import HillDiscriminant, free_problem, mathieu  # noqa: E402
from hillspps.cli import main as cli_main  # noqa: E402
from hillspps.darboux import darboux_transform, double_darboux, invariance_deviation  # noqa: E402
from hillspps.discriminant import discriminant_series_star, find_lambda0, lambda0_bounds  # noqa: E402
from hillspps.grid import GridFunction, antiderivative, make_grid, sample  # noqa: E402
from hillspps.problems import oracle_discriminant  # noqa: E402
from hillspps.spectrum import bloch_factors  # noqa: E402

from reference_values import PUBLISHED_NBS, PUBLISHED_R5_MINIMUM, PUBLISHED_SPPS  # noqa: E402

_FITS = {}


def fitted(name):
    if name not in _FITS:
        prob = {"free": free_problem, "r1": lambda: mathieu(1), "r5": lambda: mathieu(5)}[name]()
        _FITS[name] = HillDiscriminant(order=100).fit(prob)
    return _FITS[name]


def report(number, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


def cli_eigenvalues(r, count):
    out = io.StringIO()
    t = time.perf_counter()
    code = cli_main(["eigenvalues", "--mathieu", str(r), "--count", str(count), "--order", "100",
                     "--json"], out=out)
    elapsed = time.perf_counter() - t
    assert code == 0, f"eigenvalues command exited with {code}"
    return np.array([row["lambda"] for row in json.loads(out.getvalue())]), elapsed


def criterion_1(capsys=None):
    t = time.perf_counter()
    est = HillDiscriminant(order=100).fit(free_problem(7001))
    lam = np.linspace(0, 40, 4001)
    err = float(np.max(np.abs(est.predict(lam) - 2 * np.cos(np.sqrt(lam) * np.pi))))
    elapsed = time.perf_counter() - t
    ok = err <= 1e-8 and elapsed <= 10
    return report(1, ok, f"free problem max|D_N - 2cos(sqrt(l) pi)| on [0,40] = {err:.2e} (<= 1e-8), "
                         f"runtime {elapsed:.1f} s (<= 10 s)", capsys)


def criterion_2(capsys=None):
    lam, elapsed = cli_eigenvalues(1, 11)
    spps = np.abs(lam - PUBLISHED_SPPS[1])
    nbs = np.abs(lam - np.array(PUBLISHED_NBS[1]))
    tol_spps = np.where(np.arange(11) <= 6, 1e-4, 1e-3)
    tol_nbs = np.where(np.arange(11) <= 6, 5e-4, 1e-3)
    ok = bool(np.all(spps <= tol_spps) and np.all(nbs <= tol_nbs) and elapsed <= 60)
    return report(2, ok, f"Mathieu r=1 table: max|d| vs SPPS n<=6 {spps[:7].max():.1e} (<= 1e-4), "
                         f"n>=7 {spps[7:].max():.1e} (<= 1e-3); vs NBS n<=6 {nbs[:7].max():.1e} (<= 5e-4), "
                         f"n>=7 {nbs[7:].max():.1e} (<= 1e-3); runtime {elapsed:.1f} s (<= 60 s)", capsys)


def criterion_3(capsys=None):
    lam, elapsed = cli_eigenvalues(5, 11)
    ref = np.array(PUBLISHED_SPPS[5])
    checks = {0: 1e-4, 1: 1e-4, 2: 1e-3, 3: 1e-3, 4: 1e-3, 9: 5e-3, 10: 5e-3}
    dev = {n: abs(lam[n] - ref[n]) for n in checks}
    ok = all(dev[n] <= tol for n, tol in checks.items()) and elapsed <= 60
    worst = max(checks, key=lambda n: dev[n] / checks[n])
    return report(3, ok, f"Mathieu r=5 table: l0 off by {dev[0]:.1e}, l1 {dev[1]:.1e} (<= 1e-4), "
                         f"l2..l4 max {max(dev[n] for n in (2, 3, 4)):.1e} (<= 1e-3), l9/l10 max "
                         f"{max(dev[9], dev[10]):.1e} (<= 5e-3); tightest n={worst}; runtime {elapsed:.1f} s",
                  capsys)


def criterion_4(capsys=None):
    est = fitted("r5")
    lam = np.linspace(-7, 2, 90001)
    d = est.predict(lam)
    i = int(np.argmin(d))
    ok = abs(d[i] - PUBLISHED_R5_MINIMUM) <= 0.5
    return report(4, ok, f"Mathieu r=5 min D_N on [-7,2] = {d[i]:.4f} at lambda={lam[i]:.4f} "
                         f"(target {PUBLISHED_R5_MINIMUM} +- 0.5)", capsys)


def criterion_5(capsys=None):
    parts = []
    ok = True
    for name in ("free", "r1", "r5"):
        est = fitted(name)
        lam = np.linspace(est.lambda0_ - 1, est.lambda0_ + 30, 20)
        err = max(abs(est.predict(l)[0] - oracle_discriminant(est.problem_, l)) for l in lam)
        ok &= err <= 1e-6
        parts.append(f"{name} {err:.1e}")
    return report(5, ok, "max|D_SPPS - D_RK| over 20 lambda: " + ", ".join(parts) + " (<= 1e-6)", capsys)


def criterion_6(capsys=None):
    parts = []
    ok = True
    for name in ("r1", "r5"):
        est = fitted(name)
        partner = est.partner()
        probes = np.linspace(est.lambda0_ - 1, est.lambda0_ + 30, 50)
        dev = invariance_deviation(partner, est.coefficients_, probes)
        inv = float(np.max(np.abs(double_darboux(partner).values - est.problem_.q_values.values)))
        ok &= dev <= 1e-6 and inv <= 1e-5
        parts.append(f"{name}: max|D - D~| {dev:.1e} (<= 1e-6), max|q~~ - q| {inv:.1e} (<= 1e-5)")
    return report(6, ok, "; ".join(parts), capsys)


def criterion_7(capsys=None):
    est = fitted("r5")
    prob = est.problem_
    rng = np.random.default_rng(11)
    failures = []

    # Wronskian constancy and initial conditions at 20 random lambda in the budget
    w_dev, ic = 0.0, 0.0
    for lam in est.lambda0_ + rng.uniform(-1, 30, 20):
        pair = est.solutions(lam)
        w = pair.wronskian(prob).astype(float)
        w_dev = max(w_dev, float(np.max(np.abs(w - w[0])) / abs(w[0])))
        ic = max(ic, pair.initial_defect())
    if w_dev > 1e-8:
        failures.append(f"wronskian {w_dev:.1e}")
    if ic > 1e-9:
        failures.append(f"initial conditions {ic:.1e}")

    # Bloch factors
    beta = max(abs(np.prod(bloch_factors(d)) - 1) for d in np.linspace(-50, 50, 1001))
    unimod = max(abs(abs(b) - 1) for e in est.eigenvalues(11) for b in bloch_factors(est.series_(e.value)))
    if beta > 1e-9 or unimod > 1e-6:
        failures.append(f"bloch product {beta:.1e} / unimodular {unimod:.1e}")

    # ground-state annihilation by the Darboux map
    ann = darboux_transform(est.partner(), est.f0_, est.f0_prime_).max_abs() / est.f0_prime_.max_abs()
    if ann > 1e-10:
        failures.append(f"annihilation {ann:.1e}")

    # lambda_0 inside its a-priori bounds, up to roundoff (free problem: bounds collapse to [0, 0])
    def inside(e):
        slack = 1e-12 * max(1.0, abs(e.bounds_.lower))
        return e.bounds_.lower - slack <= e.lambda0_ <= e.bounds_.upper + slack

    contained = all(inside(fitted(n)) for n in ("free", "r1", "r5"))
    if not contained:
        failures.append("lambda0 outside bounds")

    # antiderivative: linearity, cubic exactness at even nodes, cosine
    g = make_grid(1.3, 41)
    a, b = rng.normal(size=41), rng.normal(size=41)
    lin = np.max(np.abs(antiderivative(GridFunction(g, 2 * a - 3 * b)).values
                        - 2 * antiderivative(GridFunction(g, a)).values
                        + 3 * antiderivative(GridFunction(g, b)).values))
    poly = np.polynomial.Polynomial([0.3, -2, 1.5, 4])
    cubic = np.max(np.abs(antiderivative(sample(poly, g)).values[::2] - poly.integ()(g.nodes)[::2]))
    gp = make_grid(np.pi, 7001)
    cos_err = np.max(np.abs(antiderivative(sample(np.cos, gp)).values - np.sin(gp.nodes)))
    if lin > 1e-12 or cubic > 1e-11 or cos_err > 1e-12:
        failures.append(f"antiderivative lin {lin:.1e} cubic {cubic:.1e} cos {cos_err:.1e}")

    ok = not failures
    detail = ("property suites: wronskian {:.1e}, initial {:.1e}, beta {:.1e}/{:.1e}, annihilation {:.1e}, "
              "bounds {}, antiderivative {:.1e}/{:.1e}/{:.1e}").format(
        w_dev, ic, beta, unimod, ann, "ok" if contained else "violated", lin, cubic, cos_err)
    if failures:
        detail += " -- failed: " + "; ".join(failures)
    return report(7, ok, detail, capsys)


def criterion_8(capsys=None):
    parts = []
    ok = True
    for r in (1, 5):
        prob = mathieu(r)
        bounds = lambda0_bounds(prob)
        lam0 = find_lambda0(prob, 100)
        star = discriminant_series_star(prob, bounds.lower - 1, 100)
        below = star(np.linspace(bounds.lower - 1, bounds.lower, 50))
        inside = bounds.lower <= lam0 <= bounds.upper
        ok &= inside and bool(np.all(below > 2))
        parts.append(f"r={r}: lambda0={lam0:.10f} in [{bounds.lower:.3f}, {bounds.upper:.3f}] {inside}, "
                     f"min D* below min q = {below.min():.3f} (> 2)")
    return report(8, ok, "; ".join(parts), capsys)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_criterion(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
