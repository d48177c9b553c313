"""Acceptance criteria: full-scale Monte Carlo reproduction plus the exact property suite.

Run alone with ``pytest tests/test_acceptance.py -v``; each criterion prints one
PASS/FAIL line. The Monte Carlo grid takes well under a minute on one core.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from dcca.arfima import ma_coefficients
from dcca.cli import main
from dcca.detrend import BoxMode, rho_dcca
from dcca.errors import DegenerateInputError
from dcca.montecarlo import GridSpec, run_grid, rows_for

from oracles import gamma_ratio, naive_rho

SEED = 2014
REPS = 1000
D_ALL = (0.1, 0.4, 0.6, 0.9, 1.1, 1.4)
RHO = (-0.9, -0.5, 0.0, 0.5, 0.9)


def report(criterion: str, ok: bool, detail: str, capsys) -> None:
    with capsys.disabled():
        print(f"\n[acceptance {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def grid_1000():
    spec = GridSpec(
        d_values=D_ALL,
        rho_values=RHO,
        T_values=(1000,),
        scale_fractions=(Fraction(1, 100), Fraction(1, 50), Fraction(1, 10), Fraction(1, 5)),
        reps=REPS,
        base_seed=SEED,
    )
    result = run_grid(spec)
    assert result.errors == []
    return result.rows


@pytest.fixture(scope="module")
def grid_5000():
    spec = GridSpec(
        d_values=(0.4,),
        rho_values=(0.5,),
        T_values=(5000,),
        scale_fractions=(Fraction(1, 100),),
        reps=REPS,
        base_seed=SEED,
        estimators=("dcca",),
    )
    result = run_grid(spec)
    assert result.errors == []
    return result.rows


def one(rows, **match):
    (row,) = rows_for(rows, **match)
    return row


def test_c1_unbiasedness(grid_1000, capsys):
    errors = {}
    for d in (0.1, 0.6, 0.9, 1.4):
        for rho in RHO:
            for s in (10, 200):
                r = one(grid_1000, estimator="dcca", d=d, rho_true=rho, s=s)
                errors[d, rho, s] = r.median - rho
    bad = {k: v for k, v in errors.items() if abs(v) > 0.03}
    worst = max(abs(v) for v in errors.values())
    detail = f"{len(errors) - len(bad)}/{len(errors)} cells within 0.03, max |median - rho| = {worst:.4f}"
    if bad:
        detail += "; violations (d, rho, s): " + ", ".join(f"{k}: {v:+.4f}" for k, v in sorted(bad.items()))
    report("1 unbiasedness", not bad, detail, capsys)


def test_c2_dcca_band(grid_1000, capsys):
    details, ok = [], True
    for d, centre in ((0.6, 0.13), (0.9, 0.16)):
        r = one(grid_1000, estimator="dcca", d=d, rho_true=0.0, s=10)
        good = abs(r.q025 + centre) <= 0.04 and abs(r.q975 - centre) <= 0.04
        ok &= good
        details.append(f"d={d}: [{r.q025:.3f}, {r.q975:.3f}] vs +-{centre}+-0.04")
    report("2 DCCA band", ok, "; ".join(details), capsys)


def test_c3_pearson_band(grid_1000, capsys):
    details, ok = [], True
    for d, centre, tol in ((0.6, 0.40, 0.08), (0.9, 0.75, 0.10)):
        r = one(grid_1000, estimator="pearson", d=d, rho_true=0.0)
        good = abs(r.q025 + centre) <= tol and abs(r.q975 - centre) <= tol
        ok &= good
        details.append(f"d={d}: [{r.q025:.3f}, {r.q975:.3f}] vs +-{centre}+-{tol}")
    report("3 Pearson band", ok, "; ".join(details), capsys)


def test_c4_pearson_bias(grid_1000, capsys):
    p_lo = abs(one(grid_1000, estimator="pearson", d=0.1, rho_true=0.9).median - 0.9)
    p_hi = abs(one(grid_1000, estimator="pearson", d=1.4, rho_true=0.9).median - 0.9)
    d_lo = abs(one(grid_1000, estimator="dcca", d=0.1, rho_true=0.9, s=10).median - 0.9)
    d_hi = abs(one(grid_1000, estimator="dcca", d=1.4, rho_true=0.9, s=10).median - 0.9)
    ok = p_hi > p_lo and d_lo <= 0.03 and d_hi <= 0.03
    report("4 Pearson bias", ok,
           f"Pearson |bias| d=0.1 {p_lo:.4f} < d=1.4 {p_hi:.4f}; DCCA s=10 |bias| {d_lo:.4f}, {d_hi:.4f} (tol 0.03)",
           capsys)


def test_c5_precision_orderings(grid_1000, capsys):
    failures = []
    sd = {(d, s): one(grid_1000, estimator="dcca", d=d, rho_true=0.5, s=s).sd
          for d in D_ALL for s in (10, 20, 100, 200)}
    for d in D_ALL:
        if not sd[d, 10] < sd[d, 200]:
            failures.append(f"d={d}: sd(s=10)={sd[d, 10]:.4f} >= sd(s=200)={sd[d, 200]:.4f}")
    for s in (10, 20, 100, 200):
        if not sd[1.4, s] > sd[0.1, s]:
            failures.append(f"s={s}: sd(d=1.4)={sd[1.4, s]:.4f} <= sd(d=0.1)={sd[0.1, s]:.4f}")
    summary = ", ".join(f"d={d}: {sd[d, 10]:.3f}/{sd[d, 200]:.3f}" for d in D_ALL)
    report("5 precision orderings", not failures,
           "; ".join(failures) or f"sd(s=10)/sd(s=200) {summary}", capsys)


def test_c6_length_insensitivity(grid_1000, grid_5000, capsys):
    sd_1000 = one(grid_1000, estimator="dcca", d=0.4, rho_true=0.5, s=10).sd
    sd_5000 = one(grid_5000, estimator="dcca", d=0.4, rho_true=0.5, s=50).sd
    rel = abs(sd_5000 - sd_1000) / sd_1000
    report("6 length insensitivity", rel < 0.30,
           f"sd T=1000 {sd_1000:.4f}, T=5000 {sd_5000:.4f}, relative difference {rel:.3f} (tol 0.30)", capsys)


def test_c7_property_suite(capsys):
    rng = np.random.default_rng(SEED)
    modes = (BoxMode.NON_OVERLAPPING, BoxMode.OVERLAPPING)
    problems = []

    # bounds on 10^4 fuzzed inputs, mixed lengths, scales, modes and input types
    fuzzed = 0
    while fuzzed < 10_000:
        T = int(rng.integers(8, 200))
        s = int(rng.integers(4, T + 1))
        x = rng.standard_normal(T) * rng.uniform(1e-3, 1e3)
        y = rng.uniform(-1, 1) * x + rng.standard_normal(T)
        if rng.random() < 0.5:
            x, y = np.cumsum(x), np.cumsum(y)
        try:
            r = rho_dcca(x, y, s, modes[fuzzed % 2])
        except DegenerateInputError:
            continue
        fuzzed += 1
        if not -1.0 <= r <= 1.0:
            problems.append(f"bound violated: {r}")

    for _ in range(200):
        T = int(rng.integers(8, 500))
        s = int(rng.integers(4, T + 1))
        x = rng.standard_normal(T).cumsum()
        for mode in modes:
            if abs(rho_dcca(x, x, s, mode) - 1) > 1e-12 or abs(rho_dcca(x, -x, s, mode) + 1) > 1e-12:
                problems.append(f"self/negation off at T={T}, s={s}")
            y = rng.standard_normal(T) + 0.5 * x
            a, c = rng.uniform(1e-2, 1e2, 2)
            b, e = rng.uniform(-1e2, 1e2, 2)
            if abs(rho_dcca(a * x + b, c * y + e, s, mode) - rho_dcca(x, y, s, mode)) > 1e-10:
                problems.append(f"affine invariance off at T={T}, s={s}")

    for T in range(4, 31):
        x = rng.standard_normal(T)
        y = rng.standard_normal(T) - 0.3 * x
        for s in range(4, T + 1):
            for mode in modes:
                want = naive_rho(list(x), list(y), s, mode is BoxMode.OVERLAPPING)
                if abs(rho_dcca(x, y, s, mode) - want) > 1e-10:
                    problems.append(f"oracle mismatch T={T}, s={s}, {mode.value}")

    worst = 0.0
    for d in D_ALL:
        a = ma_coefficients(d, 10_000)
        ref = np.array([gamma_ratio(n, d, 30) for n in range(10_001)])
        worst = max(worst, float(np.max(np.abs(a / ref - 1))))
    if worst > 1e-12:
        problems.append(f"a_n relative error {worst:.2e}")

    report("7 property suite", not problems,
           "; ".join(problems[:5]) or f"10^4 fuzzed bounds, self/neg, affine, oracle T<=30, a_n rel err {worst:.1e}",
           capsys)


def test_c8_thread_reproducibility(tmp_path, capsys):
    args = ["mc", "--reps", "200", "--T-list", "1000", "--d-list", "0.4,1.4", "--rho-list=-0.5,0.5",
            "--seed", str(SEED), "--quiet"]
    one_thread, eight = tmp_path / "t1.csv", tmp_path / "t8.csv"
    assert main(args + ["--threads", "1", "--out", str(one_thread)]) == 0
    assert main(args + ["--threads", "8", "--out", str(eight)]) == 0
    same = one_thread.read_bytes() == eight.read_bytes()
    report("8 reproducibility", same, f"--threads 1 vs --threads 8 aggregate CSV byte-identical: {same}", capsys)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
