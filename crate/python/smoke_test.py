"""Smoke test for the gausspre_py extension module.

Builds the cdylib if needed, stages it under an importable name, then
exercises the main bindings end to end (distributions, a short fit, table
evaluation and file round-trip, EOC maps, KS testing, Mellin diagnostics).

Usage: python3 python/smoke_test.py [--skip-build]
"""

import argparse
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module(skip_build: bool) -> pathlib.Path:
    if not skip_build:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "gausspre-py"],
            cwd=ROOT,
            check=True,
        )
    built = ROOT / "target" / "release" / "libgausspre_py.so"
    if not built.exists():
        sys.exit(f"missing {built}; build gausspre-py first")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="gausspre_py_"))
    shutil.copy2(built, stage / "gausspre_py.so")
    return stage


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--skip-build", action="store_true")
    args = parser.parse_args()

    sys.path.insert(0, str(stage_module(args.skip_build)))
    import gausspre_py as gp

    # distributions
    w = gp.SymmetricWeibull(2.5)
    assert abs(w.cdf(0.0) - 0.5) < 1e-15
    assert abs(w.cdf(w.quantile(0.9)) - 0.9) < 1e-12
    assert w.density(1.0) > 0.0
    xs = w.sample(50_000, seed=1)
    assert abs(sum(xs) / len(xs)) < 0.02
    assert xs == w.sample(50_000, seed=1), "sampling must be deterministic"

    # conjugate exponent
    assert abs(gp.theta_conjugate(4.0) - 4.0) < 1e-12
    assert abs(gp.theta_conjugate(3.0) - 6.0) < 1e-12

    # density model built from known fitted parameters (full fits are slow)
    model = gp.DensityModel(3.0, 5.791, 0.2991, 1.6622, 1.2799)
    assert model.theta_prime == gp.theta_conjugate(3.0)
    assert model.g(0.5) > 0.0
    assert model.loss() < 1e-2
    assert "DensityModel" in repr(model)

    # activation table: oddness, monotonicity, derivative, file round-trip
    table = gp.build_table(model)
    assert table.theta == 3.0
    assert table.eval(0.0) == 0.0
    for z in (0.3, 1.0, 4.0, 9.0):
        assert abs(table.eval(z) + table.eval(-z)) < 1e-8
    values = table.eval_many([-1.0, 0.0, 1.0, 2.0])
    assert all(b > a for a, b in zip(values, values[1:]))
    assert table.deriv(0.0) > 0.0
    with tempfile.TemporaryDirectory() as tmp:
        path = pathlib.Path(tmp) / "phi.csv"
        table.save(path)
        loaded = gp.ActivationTable.load(path)
        assert abs(loaded.eval(1.3) - table.eval(1.3)) < 1e-12

    # EOC maps for named activations and for the table
    chi_relu = gp.chi1("relu", math.sqrt(2.0), 0.0)
    assert abs(chi_relu - 1.0) < 1e-3
    v = gp.variance_map("tanh", 1.2, 0.1, 1.0)
    assert 0.0 < v < 2.0
    assert gp.variance_map(table, 1.0, 0.0, 1.0) > 0.0

    # KS test against the standard normal
    stat, threshold, reject = gp.ks_test_normal(xs, alpha=0.05)
    assert reject and stat > threshold, "Weibull samples are not Gaussian"

    # Mellin-route failure: float64 coefficients blow up for theta near 2
    coeffs, divergence = gp.laguerre_series(2.05, 500)
    assert len(coeffs) == 500
    assert divergence is not None

    # Monte-Carlo product test on the built table
    std, ks_raw, ks_std = gp.table_product_test(table, s=200_000, seed=3)
    assert 0.95 < std < 1.05, f"product std {std}"
    assert ks_std < 0.01, f"standardized KS {ks_std}"

    print("smoke test passed")


if __name__ == "__main__":
    main()
