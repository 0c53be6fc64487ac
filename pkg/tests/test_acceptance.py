"""Acceptance gate: one test per primary criterion, each at its stated
tolerance. Fast criteria are computed inline; experiment-scale criteria
consume artifacts produced by scripts/run_acceptance.sh and fail with an
actionable message when those are missing.

Run `pytest tests/test_acceptance.py -v` for the one-line-per-criterion
report.
"""

import csv
import itertools
import json
import time

import numpy as np
import pytest

from conftest import ARTIFACTS, require_artifact
from mfopt.core import RngStream
from mfopt.nn.train import loss_and_grad, one_hot
from mfopt.objectives import FunctionObjective
from mfopt.optimizers.perturbative import fd_gradient, spsa_gradient


# -- artifact readers ---------------------------------------------------------

def load_summary(name):
    path = require_artifact(ARTIFACTS / "runs" / name / "summary.json")
    with open(path) as fh:
        return json.load(fh)


def final_accuracies(name):
    """seed -> final test accuracy for one experiment's summary.json."""
    s = load_summary(name)
    out = {}
    for e in s["runs"]:
        if e.get("error"):
            pytest.fail(f"{name} seed {e['seed']} errored: {e['error']}",
                        pytrace=False)
        out[e["seed"]] = e["final_test_accuracy"]
    return out


def final_best_scores(name):
    """seed -> final best objective score (from the per-seed CSVs)."""
    s = load_summary(name)
    out = {}
    for e in s["runs"]:
        if e.get("error"):
            pytest.fail(f"{name} seed {e['seed']} errored: {e['error']}",
                        pytrace=False)
        with open(ARTIFACTS / "runs" / name / e["csv"]) as fh:
            rows = list(csv.DictReader(fh))
        out[e["seed"]] = float(rows[-1]["best_score"])
    return out


def wins(a, b):
    """Number of common seeds where a's value is strictly lower than b's."""
    common = sorted(set(a) & set(b))
    return sum(a[s] < b[s] for s in common), len(common)


# -- gradient-oracle suite ----------------------------------------------------

def random_quadratic(dim, seed):
    rng = RngStream(seed)
    A = rng.normal(size=(dim, dim))
    A = A @ A.T + dim * np.eye(dim)
    b = rng.normal(size=dim)
    obj = FunctionObjective(lambda x: 0.5 * x @ A @ x + b @ x, dim)
    return obj, (lambda x: A @ x + b)


class TestGradientOracles:
    def test_fd_matches_analytic_on_quadratics(self):
        t0 = time.perf_counter()
        for dim in (5, 20, 50):
            obj, grad = random_quadratic(dim, seed=dim)
            w = RngStream(dim + 1).normal(size=dim)
            g = fd_gradient(obj, w, range(dim), epsilon=1e-3)
            g_true = grad(w)
            rel = np.linalg.norm(g - g_true) / np.linalg.norm(g_true)
            assert rel < 1e-6, f"D={dim}: relative error {rel:.2e}"
        assert time.perf_counter() - t0 < 10.0

    def test_spsa_sign_enumeration_is_exact(self):
        t0 = time.perf_counter()
        for dim in (4, 7, 10):
            obj, grad = random_quadratic(dim, seed=100 + dim)
            w = RngStream(dim).normal(size=dim)
            g_true = grad(w)
            total = np.zeros(dim)
            for signs in itertools.product((-1.0, 1.0), repeat=dim):
                total += spsa_gradient(obj, w, 1e-3, np.array(signs))
            g_avg = total / 2 ** dim
            rel = np.linalg.norm(g_avg - g_true) / np.linalg.norm(g_true)
            assert rel < 1e-10, f"D={dim}: relative error {rel:.2e}"
        assert time.perf_counter() - t0 < 10.0


# -- backprop vs central finite differences -----------------------------------

class TestBackpropCheck:
    def test_all_layer_types_within_1e5(self):
        from test_nn import GRAD_SPECS, central_fd_grad
        t0 = time.perf_counter()
        for name, (spec, in_shape) in sorted(GRAD_SPECS.items()):
            rng = RngStream(17)
            w = spec.init_params(rng)
            if spec.constraint == "positive_only":
                w = np.where(np.abs(w) < 0.05, 0.05, w)
            X = rng.normal(size=(4,) + in_shape)
            y = rng.integers(0, 3, size=4)
            _, g = loss_and_grad(spec, w, X, y)
            g_fd = central_fd_grad(lambda p: loss_and_grad(spec, p, X, y)[0], w)
            rel = np.linalg.norm(g - g_fd) / np.linalg.norm(g_fd)
            assert rel < 1e-5, f"{name}: relative error {rel:.2e}"
        assert time.perf_counter() - t0 < 30.0


# -- ceiling analysis ----------------------------------------------------------

@pytest.fixture(scope="module")
def ceiling():
    path = require_artifact(ARTIFACTS / "ceiling" / "summary.json")
    with open(path) as fh:
        return json.load(fh)["mean_accuracy"]


class TestCeiling:
    def test_backprop_at_least_96_5(self, ceiling):
        assert ceiling["backprop"] >= 0.965

    def test_positive_only_in_50_70(self, ceiling):
        assert 0.50 <= ceiling["positive_only"] <= 0.70

    def test_quantized4_within_1_5_points_of_backprop(self, ceiling):
        assert abs(ceiling["quantized4"] - ceiling["backprop"]) <= 0.015

    def test_quantized2_below_85(self, ceiling):
        assert ceiling["quantized2"] < 0.85

    def test_elm100_in_84_90(self, ceiling):
        assert 0.84 <= ceiling["elm"] <= 0.90

    def test_ridge_in_91_5_94_5(self, ceiling):
        assert 0.915 <= ceiling["ridge"] <= 0.945


# -- ELM scaling ----------------------------------------------------------------

@pytest.fixture(scope="module")
def elm_scaling():
    path = require_artifact(ARTIFACTS / "elm_scaling.json")
    with open(path) as fh:
        return json.load(fh)


class TestElmScaling:
    def test_ridge_crossing_above_200_at_most_600(self, elm_scaling):
        baseline = elm_scaling["ridge_baseline"]
        sizes = sorted(int(h) for h in elm_scaling["elm"])
        crossing = next((h for h in sizes
                         if elm_scaling["elm"][str(h)] > baseline), None)
        assert crossing is not None, "ELM never crosses the ridge baseline"
        assert 200 < crossing <= 600, f"crossing at h={crossing}"

    def test_ffnn_elm_neuron_ratio_exceeds_10x_at_95(self, elm_scaling):
        level = 0.95

        def first_reaching(table):
            sizes = sorted(int(h) for h in table)
            return next((h for h in sizes if table[str(h)] >= level), None)

        ffnn_h = first_reaching(elm_scaling["ffnn"])
        assert ffnn_h is not None, "no FFNN size reaches 95%"
        elm_h = first_reaching(elm_scaling["elm"])
        if elm_h is None:
            # the ELM needs more neurons than the largest size scanned
            elm_h = max(int(h) for h in elm_scaling["elm"]) + 1
        assert elm_h / ffnn_h > 10.0, f"ratio {elm_h}/{ffnn_h}"


# -- Rastrigin benchmark ---------------------------------------------------------

class TestRastrigin:
    def test_median_ordering_pepg_cma_below_spsa_fd(self):
        med = {arm: float(np.median(list(
            final_best_scores(f"rastrigin_{arm}").values())))
            for arm in ("pepg", "cma", "spsa", "fd1")}
        assert med["pepg"] <= med["cma"], med
        assert med["cma"] < med["spsa"], med
        assert med["cma"] < med["fd1"], med

    def test_pepg_beats_pso_in_4_of_5_seeds(self):
        w, n = wins(final_best_scores("rastrigin_pepg"),
                    final_best_scores("rastrigin_pso"))
        assert n == 5 and w >= 4, f"PEPG better in {w}/{n} seeds"

    def test_large_epsilon_fd_beats_small_epsilon_fd(self):
        cheat = final_best_scores("rastrigin_fd1_eps01")
        plain = final_best_scores("rastrigin_fd1")
        assert np.median(list(cheat.values())) < \
            np.median(list(plain.values()))


# -- NN black-box training grid ---------------------------------------------------

NN_ORDER = ("backprop", "pepg", "cma", "spsa", "pso")


@pytest.fixture(scope="module")
def grid():
    return {name: final_accuracies(f"nn_{name}") for name in NN_ORDER}


class TestNnGrid:
    def test_accuracy_ordering_in_4_of_5_seeds(self, grid):
        seeds = sorted(set.intersection(*(set(v) for v in grid.values())))
        assert len(seeds) == 5
        ok = sum(all(grid[a][s] >= grid[b][s]
                     for a, b in zip(NN_ORDER, NN_ORDER[1:]))
                 for s in seeds)
        detail = {n: [round(grid[n][s], 4) for s in seeds] for n in NN_ORDER}
        assert ok >= 4, f"full ordering holds in {ok}/5 seeds: {detail}"

    def test_pepg_reaches_90(self, grid):
        best = max(grid["pepg"].values())
        assert best >= 0.90, f"best PEPG accuracy {best:.4f}"

    def test_iris_all_optimizers_reach_95(self):
        accs = {}
        for opt in ("cma", "sep_cma", "simple_es", "pso", "spsa", "fd",
                    "pepg"):
            accs[opt] = float(np.median(list(
                final_accuracies(f"iris_{opt}").values())))
        assert all(a >= 0.95 for a in accs.values()), accs


# -- overhead scaling ---------------------------------------------------------------

@pytest.fixture(scope="module")
def scaling():
    s = load_summary("scaling")
    for name, r in s["results"].items():
        if "error" in r:
            pytest.fail(f"scaling scan for {name} errored: {r['error']}",
                        pytrace=False)
    return s["results"]


class TestScaling:
    def test_pepg_exponent(self, scaling):
        assert 0.8 <= scaling["pepg"]["slope"] <= 1.3, scaling["pepg"]["slope"]

    def test_spsa_exponent(self, scaling):
        assert 0.8 <= scaling["spsa"]["slope"] <= 1.3, scaling["spsa"]["slope"]

    def test_cma_exponent(self, scaling):
        assert 1.6 <= scaling["cma"]["slope"] <= 2.2, scaling["cma"]["slope"]

    def test_sep_cma_exponent(self, scaling):
        assert 0.8 <= scaling["sep_cma"]["slope"] <= 1.4, \
            scaling["sep_cma"]["slope"]

    def test_cma_update_5x_pepg_at_10k(self, scaling):
        def fitted(name, D):
            r = scaling[name]
            return np.exp(r["intercept"]) * D ** r["slope"]

        ratio = fitted("cma", 10_000) / fitted("pepg", 10_000)
        assert ratio >= 5.0, f"CMA/PEPG update-time ratio {ratio:.1f}"


# -- PEPG population saturation --------------------------------------------------------

class TestPopulationSaturation:
    def test_saturation_at_one_percent(self):
        s = load_summary("popscan")
        by_ratio = {}
        for e in s["table"]:
            if e.get("error"):
                pytest.fail(f"popscan p={e['population']} seed {e['seed']} "
                            f"errored: {e['error']}", pytrace=False)
            by_ratio.setdefault(e["ratio"], []).append(
                e["final_test_accuracy"])
        mean = {r: float(np.mean(v)) for r, v in by_ratio.items()}
        assert abs(mean[0.01] - mean[0.02]) <= 0.01, mean
        assert mean[0.01] - mean[0.0025] > 0.01, mean


# -- ONN surrogate ordering --------------------------------------------------------------

class TestOnnOrdering:
    def test_nonlinearity_on_beats_off_in_4_of_5_seeds(self):
        on = final_accuracies("onn_pepg")
        off = final_accuracies("onn_pepg_linear")
        w, n = wins({s: -a for s, a in on.items()},
                    {s: -a for s, a in off.items()})
        assert n == 5 and w >= 4, f"nonlinearity ON better in {w}/{n} seeds"

    def test_pepg_beats_spsa_in_4_of_5_seeds(self):
        pepg = final_accuracies("onn_pepg")
        spsa = final_accuracies("onn_spsa")
        w, n = wins({s: -a for s, a in pepg.items()},
                    {s: -a for s, a in spsa.items()})
        assert n == 5 and w >= 4, f"PEPG better in {w}/{n} seeds"


# -- determinism ------------------------------------------------------------------------

class TestDeterminism:
    def test_rerun_reproduces_non_timing_columns(self, tmp_path):
        from mfopt.bench.config import parse_config
        from mfopt.bench.harness import run_experiment
        cfg_text = """
[experiment]
kind = rastrigin
seeds = 0,1

[optimizer]
name = pepg
population = 10
sigma_init = 0.5
alpha_mu = 0.01
alpha_sigma = 0.002
mirrored = true

[objective]
dim = 8
noise_sigma = 0.1
score_bits = 8

[budget]
max_epochs = 25
"""
        stable = ("epoch", "evals", "best_score", "test_accuracy")

        def capture(out):
            run_experiment(parse_config(cfg_text), out_dir=str(out))
            result = {}
            for seed in (0, 1):
                with open(out / f"seed{seed}.csv") as fh:
                    result[seed] = [[row[c] for c in stable]
                                    for row in csv.DictReader(fh)]
            return result

        assert capture(tmp_path / "a") == capture(tmp_path / "b")
