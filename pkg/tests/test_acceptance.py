"""Acceptance suite: every exit criterion at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line per
criterion. The default configuration (master_seed=42) is used throughout, so
every number below is reproducible bit for bit.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from iwrisk import (
    CovariateShiftProblem,
    ExperimentConfig,
    LabeledDataset,
    RegularizedLinearClassifier,
    RngSeedSpec,
    THETA_BASE,
    empirical_risk,
    estimator_skewness,
    estimator_variance,
    expected_moment,
    gaussian_pdf,
    importance_weight,
    moment_convergence_check,
    run_model_selection,
    run_risk_distribution,
    select_lambda_closed_form,
    select_lambda_grid,
)
from iwrisk.cli import run_cli
from iwrisk.selection import DEFAULT_GRID

DEFAULT_PROBLEM = CovariateShiftProblem.default()
FIXED = RegularizedLinearClassifier()
SIZES = (2, 4, 8, 16, 32, 64)

# pilot run of the default configuration (master_seed=42), recorded during
# development; the size-64 skewness sits well below half the size-2 value
PILOT_G1 = {2: 4.9012, 4: 3.6087, 8: 2.8683, 16: 3.3046, 32: 1.7433, 64: 1.1372}


def _report(number: int, name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {number} ({name}): {status} | {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"


@pytest.fixture(scope="module")
def riskdist_run():
    start = time.perf_counter()
    results = run_risk_distribution(ExperimentConfig())
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def modelsel_run():
    results = run_model_selection(ExperimentConfig())
    return {res.n: res for res in results}


def test_criterion_1_unbiasedness(riskdist_run):
    results, elapsed = riskdist_run
    target = expected_moment(1, FIXED, DEFAULT_PROBLEM).value
    deviations = []
    ok = True
    for res in results:
        band = 4.0 * math.sqrt(res.oracle_variance / res.risks.size)
        dev = abs(res.moments.mean - target)
        deviations.append(f"n={res.n}:{dev:.2e}<={band:.2e}")
        ok = ok and dev <= band
    ok = ok and elapsed < 10.0
    _report(1, "unbiasedness", ok,
            f"runtime={elapsed:.1f}s target={target:.7f} " + " ".join(deviations))


def test_criterion_2_positive_diminishing_skew(riskdist_run):
    results, _ = riskdist_run
    g1 = {res.n: res.moments.skewness_g1 for res in results}
    ladder = [g1[n] for n in SIZES]
    inversions = sum(1 for a, b in zip(ladder, ladder[1:]) if b > a)
    ok = all(v > 0.0 for v in ladder)
    ok = ok and inversions <= 1
    ok = ok and g1[64] < g1[2] / 2.0
    detail = (f"g1={[round(v, 3) for v in ladder]} inversions={inversions} "
              f"g1(64)={g1[64]:.3f} < g1(2)/2={g1[2] / 2:.3f} "
              f"(pilot: {PILOT_G1})")
    _report(2, "positive diminishing skew", ok, detail)


def test_criterion_3_body_dominance(modelsel_run):
    bf2 = modelsel_run[2].split.body_fraction
    bf64 = modelsel_run[64].split.body_fraction
    ok = 0.60 <= bf2 <= 0.72 and 0.47 <= bf64 <= 0.56
    _report(3, "body dominance", ok,
            f"body_fraction(2)={bf2:.4f} in [0.60,0.72]; "
            f"body_fraction(64)={bf64:.4f} in [0.47,0.56]")


def test_criterion_4_lambda_distortion(modelsel_run):
    body_off = {n: modelsel_run[n].body_summary.mean_lambda - THETA_BASE
                for n in SIZES}
    tail_off = {n: modelsel_run[n].tail_summary.mean_lambda - THETA_BASE
                for n in SIZES}
    gaps = {n: abs(modelsel_run[n].body_summary.mean_lambda
                   - modelsel_run[n].tail_summary.mean_lambda)
            for n in SIZES}
    checks = {
        "body(2) in [0.3,1.7]": 0.3 <= body_off[2] <= 1.7,
        "tail(2) in [-3.5,-0.7]": -3.5 <= tail_off[2] <= -0.7,
        "signs persist n=2,4,8": all(body_off[n] > 0.0 > tail_off[n]
                                     for n in (2, 4, 8)),
        "gap(32) < 0.2": gaps[32] < 0.2,
        "gap(64) < 0.2": gaps[64] < 0.2,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    _report(4, "lambda-hat distortion", ok,
            f"body_off(2)={body_off[2]:+.3f} tail_off(2)={tail_off[2]:+.3f} "
            f"gap(32)={gaps[32]:.4f} gap(64)={gaps[64]:.4f}"
            + (f" | failed: {failed}" if failed else ""))


def test_criterion_5_oracle_monte_carlo_equivalence():
    config = ExperimentConfig(sigma_source=0.95, sample_sizes=(16,),
                              repetitions=200_000)
    start = time.perf_counter()
    res = run_risk_distribution(config)[0]
    elapsed = time.perf_counter() - start
    problem = config.problem()
    var_oracle = estimator_variance(FIXED, 16, True, problem).value
    skew_oracle = estimator_skewness(FIXED, 16, True, problem).value
    var_emp = float(np.var(res.risks, ddof=1))
    skew_emp = res.moments.skewness_g1
    var_ok = abs(var_emp - var_oracle) <= 0.10 * var_oracle
    skew_ok = abs(skew_emp - skew_oracle) <= 0.20 * skew_oracle
    ok = var_ok and skew_ok and elapsed < 60.0
    _report(5, "oracle equivalence in the convergent regime", ok,
            f"runtime={elapsed:.1f}s var={var_emp:.6f} vs {var_oracle:.6f} "
            f"({abs(var_emp / var_oracle - 1) * 100:.1f}%), "
            f"g1={skew_emp:.4f} vs {skew_oracle:.4f} "
            f"({abs(skew_emp / skew_oracle - 1) * 100:.1f}%)")


def test_criterion_6_divergence_guard():
    check2 = moment_convergence_check(2, DEFAULT_PROBLEM)
    check3 = moment_convergence_check(3, DEFAULT_PROBLEM)
    skew = estimator_skewness(FIXED, 8, True, DEFAULT_PROBLEM)
    ok = check2 is True and check3 is False
    ok = ok and not skew.converged and math.isnan(skew.value)
    _report(6, "divergence guard", ok,
            f"k2={check2} k3={check3} skewness converged={skew.converged}")


def test_criterion_7_weight_law():
    source = DEFAULT_PROBLEM.source
    total, _ = quad(
        lambda x: importance_weight(x, DEFAULT_PROBLEM) * gaussian_pdf(x, source),
        -12 * source.std, 12 * source.std, epsabs=1e-12, limit=200,
    )
    quad_ok = abs(total - 1.0) < 1e-8

    rng = RngSeedSpec(master_seed=42, stream_id=0).generator()
    xs = rng.normal(source.mean, source.std, size=100_000)
    w = importance_weight(xs, DEFAULT_PROBLEM)
    se = w.std(ddof=1) / math.sqrt(w.size)
    mc_ok = abs(w.mean() - 1.0) < 3.0 * se

    grid = np.linspace(-8.0, 8.0, 16001)
    wg = importance_weight(grid, DEFAULT_PROBLEM)
    min_ok = bool(np.all(wg >= 0.75)) and bool(np.all(w >= 0.75))
    near_zero_only = bool(np.all(wg[np.abs(grid) > 0.05] > 0.75))
    argmin_x = float(xs[np.argmin(w)])
    ok = quad_ok and mc_ok and min_ok and near_zero_only and abs(argmin_x) < 0.05
    _report(7, "weight law", ok,
            f"quad E[w]={total:.10f}, MC mean={w.mean():.5f} (3SE={3 * se:.5f}), "
            f"min w={w.min():.6f} at x={argmin_x:+.5f}")


def test_criterion_8_selection_correctness():
    rng = np.random.default_rng(2042)
    step = DEFAULT_GRID.step
    checked = 0
    agree = True
    while checked < 1000:
        n = int(rng.integers(1, 9))
        ds = LabeledDataset(xs=rng.normal(0, 1, n),
                            ys=rng.choice([-1.0, 1.0], n), domain="source")
        w = rng.uniform(0.05, 2.0, n)
        exact = select_lambda_closed_form(ds, w)
        if not (DEFAULT_GRID.min < exact.lambda_hat < DEFAULT_GRID.max):
            continue
        approx = select_lambda_grid(ds, w, DEFAULT_GRID)
        agree = agree and abs(approx.lambda_hat - exact.lambda_hat) <= step
        checked += 1

    ds = LabeledDataset(xs=rng.normal(0, 1, 12),
                        ys=rng.choice([-1.0, 1.0], 12), domain="source")
    w = rng.uniform(0.05, 2.0, 12)
    best = select_lambda_closed_form(ds, w)
    certificate = all(
        best.risk_at_min
        <= empirical_risk(ds, RegularizedLinearClassifier(lam=float(lam)), w).value
        + 1e-12
        for lam in rng.uniform(-8.0, 8.0, 1000)
    )
    ok = agree and certificate
    _report(8, "selection correctness", ok,
            f"grid agreement on 1000 datasets={agree}, "
            f"1000-probe certificate={certificate}")


def test_criterion_9_determinism(tmp_path):
    args = ["all", "--reps", "30", "--sizes", "2,4", "--seed", "19"]
    names = ["weights.csv", "riskdist.csv", "riskdist_summary.csv",
             "modelsel.csv", "modelsel_summary.csv"]
    outs = []
    for tag, extra in (("a", []), ("b", []), ("c", ["--threads", "3"])):
        out = tmp_path / tag
        assert run_cli([*args, *extra, "--out", str(out)]) == 0
        outs.append(out)
    identical = all(
        (outs[0] / name).read_bytes() == (other / name).read_bytes()
        for other in outs[1:]
        for name in names
    )
    _report(9, "determinism", identical,
            "rerun and 3-thread run byte-identical across all five CSVs")
