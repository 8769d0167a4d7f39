"""Acceptance gate: one test per release criterion, at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion alongside the pytest verdicts.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from mocet.corpus import EmbeddingVector, HarmModel, dump_corpus
from mocet.engine import closed_form_success, cumulative_mocet, mocet_score, simulate
from mocet.error_analysis import (
    CategoryProfile,
    approximation_report,
    deviations,
    weighted_mean_probability,
)
from mocet.knn import build_index, nearest_neighbors
from mocet.validation import leave_one_out_predictions, separation_test

from oracles import (
    brute_force_neighbors,
    permutation_p_value_u,
    product,
    random_corpus,
    two_cluster_corpus,
)


def _report(name, detail):
    print(f"\n[PASS] {name}: {detail}")


class TestPublishedScoreReproduction:
    def test_published_score_windows(self):
        start = time.perf_counter()
        harm_a = HarmModel(weight=2315.0, occurrence_rate=30.0)
        mocet_a = mocet_score(closed_form_success([0.0082]), harm_a)
        cumulative_a = cumulative_mocet(mocet_a, harm_a)
        assert 18.75 <= mocet_a <= 19.17
        assert 562.0 <= cumulative_a <= 575.0

        harm_b = HarmModel(weight=49.6, occurrence_rate=30.0)
        mocet_b = mocet_score(closed_form_success([0.0118]), harm_b)
        cumulative_b = cumulative_mocet(mocet_b, harm_b)
        assert 0.574 <= mocet_b <= 0.597
        assert 17.2 <= cumulative_b <= 17.9
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0
        _report(
            "published-score reproduction",
            f"mocet {mocet_a:.2f}/{mocet_b:.3f}, cumulative {cumulative_a:.1f}/"
            f"{cumulative_b:.2f} inside windows ({elapsed:.3f}s)",
        )


class TestMonteCarloConvergence:
    def test_fifty_random_vectors_within_three_sigma(self):
        # entries kept in [0.5, 1] so the chain product stays large enough
        # for the binomial normal approximation behind the 3-sigma check
        # (tiny products make the estimated std error collapse to zero)
        start = time.perf_counter()
        rng = np.random.default_rng(424242)
        hits = 0
        for seed in range(50):
            length = int(rng.integers(1, 11))
            probs = list(rng.uniform(0.5, 1.0, size=length))
            result = simulate(probs, trials=100_000, seed=seed)
            if abs(result.mean - product(probs)) <= 3 * result.std_error:
                hits += 1
        elapsed = time.perf_counter() - start
        assert hits >= 48
        assert elapsed < 30.0
        _report("monte-carlo convergence", f"{hits}/50 within 3*std_error ({elapsed:.1f}s)")


class TestErrorAnalysisSuite:
    def test_error_analysis_criteria(self):
        start = time.perf_counter()
        rng = np.random.default_rng(90210)

        # (a) weighted deviations sum to zero on 1000 random profiles
        for _ in range(1000):
            m = int(rng.integers(1, 7))
            profile = CategoryProfile(tuple(
                (int(rng.integers(1, 40)), float(rng.uniform(0.05, 1.0))) for _ in range(m)
            ))
            alphas = deviations(profile, weighted_mean_probability(profile))
            total = sum(n * a for (n, _), a in zip(profile.groups, alphas))
            assert abs(total) <= 1e-12 * profile.total_steps

        # (b) the second-order correction beats the naive power on every
        # profile with max |alpha|/p <= 0.3
        checked = 0
        while checked < 100:
            m = int(rng.integers(2, 7))
            center = float(rng.uniform(0.35, 0.85))
            profile = CategoryProfile(tuple(
                (int(rng.integers(1, 30)),
                 min(1.0, center * (1.0 + float(rng.uniform(-0.12, 0.12)))))
                for _ in range(m)
            ))
            p = weighted_mean_probability(profile)
            if max(abs(a) for a in deviations(profile, p)) / p > 0.3:
                continue
            checked += 1
            report = approximation_report(profile)
            assert abs(report.second_order_approx - report.exact_e_y) <= \
                abs(report.naive_approx - report.exact_e_y)

        # (c) worked example, values re-derived with the product oracle
        report = approximation_report(CategoryProfile(((5, 0.9), (5, 0.8))))
        assert report.exact_e_y == pytest.approx(product([0.9] * 5 + [0.8] * 5), rel=1e-12)
        assert abs(report.exact_e_y - 0.193491) <= 1e-6
        assert abs(report.naive_approx - 0.196874) <= 1e-6
        assert abs(report.second_order_approx - report.exact_e_y) / report.exact_e_y <= 0.0005

        elapsed = time.perf_counter() - start
        assert elapsed < 5.0
        _report(
            "error-analysis suite",
            f"zero-sum x1000, correction dominance x100, worked example "
            f"(exact {report.exact_e_y:.6f}) ({elapsed:.1f}s)",
        )


class TestKnnOracleEquivalence:
    def test_two_hundred_random_corpora(self):
        start = time.perf_counter()
        rng = np.random.default_rng(777)
        for _ in range(200):
            size = int(rng.integers(1, 501))
            dim = int(rng.integers(1, 65))
            corpus = random_corpus(rng, size=size, dim=dim)
            index = build_index(corpus)
            k = int(rng.integers(1, size + 1))
            query = EmbeddingVector(tuple(rng.uniform(-1, 1, size=dim)))
            got = nearest_neighbors(index, query, k)
            want = brute_force_neighbors(corpus, query.values, k)
            assert [item_id for item_id, _ in got] == [item_id for item_id, _ in want]
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        _report("knn oracle equivalence", f"200 corpora, ids and order identical ({elapsed:.1f}s)")


class TestSeparationMethod:
    def test_synthetic_clusters_significant_and_calibrated(self):
        start = time.perf_counter()
        corpus = two_cluster_corpus(seed=1337)

        # significance at k in {10, 20, 40}, confirmed by the permutation oracle
        p_values = {}
        for k in (10, 20, 40):
            predictions = leave_one_out_predictions(corpus, k=k)
            result = separation_test(predictions, k=k)
            assert result.p_value_u < 0.01, f"k={k} not significant"
            perm_p = permutation_p_value_u(
                [p.predicted_p for p in predictions],
                [p.outcome for p in predictions],
                n_shuffles=10_000,
                seed=k,
            )
            assert perm_p < 0.01, f"k={k} permutation oracle disagrees"
            p_values[k] = (result.p_value_u, perm_p)

        # under outcome shuffling the test rejects at <= 1.5x nominal
        predictions = leave_one_out_predictions(corpus, k=20)
        values = [p.predicted_p for p in predictions]
        labels = np.array([p.outcome for p in predictions])
        rng = np.random.default_rng(555)
        n_shuffles = 2000
        rejections = {0.05: 0, 0.01: 0}
        from mocet.validation import LooPrediction
        for _ in range(n_shuffles):
            shuffled = rng.permutation(labels)
            result = separation_test([
                LooPrediction(item_id=str(i), predicted_p=v, outcome=int(o))
                for i, (v, o) in enumerate(zip(values, shuffled))
            ])
            for alpha in rejections:
                if result.p_value_u < alpha:
                    rejections[alpha] += 1
        for alpha, count in rejections.items():
            assert count <= 1.5 * alpha * n_shuffles, f"alpha={alpha}: {count} rejections"

        elapsed = time.perf_counter() - start
        assert elapsed < 120.0
        _report(
            "separation method validation",
            f"p_u {', '.join(f'k={k}: {p[0]:.2e}' for k, p in p_values.items())}; "
            f"null rejections {rejections[0.05]}/2000 @0.05, "
            f"{rejections[0.01]}/2000 @0.01 ({elapsed:.1f}s)",
        )


class TestCliDeterminism:
    def test_identical_flags_identical_bytes(self, tmp_path):
        corpus_path = tmp_path / "corpus.jsonl"
        with open(corpus_path, "w", encoding="utf-8") as handle:
            dump_corpus(two_cluster_corpus(seed=4242, n_items=50, dim=4), handle)
        protocol_path = tmp_path / "protocol.json"
        protocol_path.write_text(json.dumps({
            "scenario": "determinism-check",
            "harm": {"weight": 2315.0, "occurrence_rate": 30.0},
            "steps": [
                {"id": "s1", "embedding": list(range(4))},
                {"id": "s2", "p": 0.4},
            ],
        }))
        argv = [sys.executable, "-m", "mocet", "score",
                "--corpus", str(corpus_path), "--protocol", str(protocol_path),
                "--k", "10", "--trials", "5000", "--seed", "7"]
        runs = [subprocess.run(argv, capture_output=True) for _ in range(2)]
        for run in runs:
            assert run.returncode == 0, run.stderr
        assert runs[0].stdout == runs[1].stdout
        assert runs[0].stdout
        _report("cli determinism", f"two runs, {len(runs[0].stdout)} identical bytes")
