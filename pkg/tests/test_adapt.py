"""Adaptation-strategy, sweep, and transfer tests."""

from __future__ import annotations

import random

import pytest

from judgekit.adapt import (
    SweepObjective,
    SweepResult,
    ThresholdGrid,
    TokenMap,
    TransferPlan,
    apply_transfer,
    judge_direct,
    judge_threshold,
    sweep,
)
from judgekit.agreement import cohen_kappa, confusion
from judgekit.errors import (
    EmptyGrid,
    MissingPrediction,
    MissingScore,
    MissingSource,
    MissingToken,
    UnknownToken,
)
from judgekit.metrics import MetricSpec
from judgekit.trec_io import BinaryQrels, Run, ScoreRecord, ScoreTable


def _table(records: dict[tuple[str, str], ScoreRecord]) -> ScoreTable:
    return ScoreTable(records)


def _score_only(values: dict[tuple[str, str], float]) -> ScoreTable:
    return _table({pair: ScoreRecord(score=value) for pair, value in values.items()})


class TestJudgeDirect:
    def test_true_maps_to_relevant(self):
        table = _table({("q1", "d1"): ScoreRecord(token="true")})
        assert judge_direct(table).entries == {("q1", "d1"): 1}

    def test_false_maps_to_irrelevant(self):
        table = _table({("q1", "d1"): ScoreRecord(token="false")})
        assert judge_direct(table).entries == {("q1", "d1"): 0}

    def test_unknown_token(self):
        table = _table({("q1", "d1"): ScoreRecord(token="maybe")})
        with pytest.raises(UnknownToken, match=r"maybe.*q1.*d1"):
            judge_direct(table)

    def test_missing_token(self):
        table = _table({("q1", "d1"): ScoreRecord(score=0.4)})
        with pytest.raises(MissingToken):
            judge_direct(table)

    def test_ignores_scores_and_probs(self):
        low = _table({("q1", "d1"): ScoreRecord(score=0.01, token="true", prob=0.01)})
        high = _table({("q1", "d1"): ScoreRecord(score=0.99, token="true", prob=0.99)})
        assert judge_direct(low) == judge_direct(high)

    def test_custom_token_map(self):
        table = _table({("q1", "d1"): ScoreRecord(token="yes")})
        token_map = TokenMap({"yes": 1, "no": 0, "nope": 0})
        assert judge_direct(table, token_map).entries == {("q1", "d1"): 1}

    def test_key_set_preserved(self):
        table = _table({("q1", "d1"): ScoreRecord(token="true"), ("q2", "d9"): ScoreRecord(token="false")})
        assert set(judge_direct(table).entries) == set(table.records)


class TestJudgeThreshold:
    def test_boundary_is_inclusive(self):
        assert judge_threshold(_score_only({("q1", "d1"): 0.5}), 0.5).entries == {("q1", "d1"): 1}

    def test_below_boundary(self):
        assert judge_threshold(_score_only({("q1", "d1"): 0.49}), 0.5).entries == {("q1", "d1"): 0}

    def test_theta_below_minimum_labels_everything(self):
        table = _score_only({("q1", "d1"): 0.2, ("q1", "d2"): 0.9})
        assert set(judge_threshold(table, 0.1).entries.values()) == {1}

    def test_missing_score(self):
        with pytest.raises(MissingScore):
            judge_threshold(_table({("q1", "d1"): ScoreRecord(token="true")}), 0.5)

    def test_monotone_in_theta(self):
        rng = random.Random(41)
        table = _score_only({(f"q{i % 5}", f"d{i}"): rng.uniform(-2, 2) for i in range(100)})
        thetas = sorted(rng.uniform(-2, 2) for _ in range(10))
        labelled = [
            {pair for pair, label in judge_threshold(table, theta).entries.items() if label == 1}
            for theta in thetas
        ]
        for tighter, looser in zip(labelled[1:], labelled):
            assert tighter <= looser

    def test_commutes_with_increasing_transform(self):
        rng = random.Random(43)
        values = {(f"q{i % 3}", f"d{i}"): rng.uniform(-3, 3) for i in range(60)}
        theta = 0.25

        def transform(x: float) -> float:
            return x**3 + 2 * x + 1  # strictly increasing

        direct = judge_threshold(_score_only(values), theta)
        mapped = judge_threshold(
            _score_only({pair: transform(value) for pair, value in values.items()}), transform(theta)
        )
        assert direct == mapped


class TestGrids:
    def test_unit_grid(self):
        grid = ThresholdGrid.unit()
        assert len(grid) == 101
        assert grid.thetas[0] == 0.0
        assert grid.thetas[-1] == 1.0
        assert grid.thetas[50] == 0.5

    def test_wide_grid(self):
        grid = ThresholdGrid.wide()
        assert len(grid) == 161
        assert grid.thetas[0] == -8.0
        assert grid.thetas[-1] == 8.0

    def test_for_scores_picks_unit_for_probabilities(self):
        table = _score_only({("q1", "d1"): 0.4, ("q1", "d2"): 1.0})
        assert ThresholdGrid.for_scores(table) == ThresholdGrid.unit()

    def test_for_scores_picks_wide_for_unbounded(self):
        table = _score_only({("q1", "d1"): -3.5, ("q1", "d2"): 6.0})
        assert ThresholdGrid.for_scores(table) == ThresholdGrid.wide()

    def test_empty_grid_raises(self):
        with pytest.raises(EmptyGrid):
            ThresholdGrid(())

    def test_non_increasing_rejected(self):
        with pytest.raises(ValueError):
            ThresholdGrid((0.1, 0.1, 0.2))


class TestSweep:
    def _fixture(self):
        gold = BinaryQrels({("q1", "d1"): 1, ("q1", "d2"): 0, ("q2", "d1"): 1, ("q2", "d2"): 0})
        scores = _score_only(
            {pair: (0.9 if label == 1 else 0.1) for pair, label in gold.entries.items()}
        )
        return scores, gold

    def test_separable_scores_curve(self):
        scores, gold = self._fixture()
        result = sweep(scores, gold, [0.0, 0.5, 1.0], SweepObjective("kappa"))
        assert result.curve == ((0.0, 0.0), (0.5, 1.0), (1.0, 0.0))
        assert result.selected == 0.5

    def test_flat_curve_selects_smallest(self):
        gold = BinaryQrels({("q1", "d1"): 1, ("q1", "d2"): 0})
        scores = _score_only({("q1", "d1"): 0.9, ("q1", "d2"): 0.1})
        result = sweep(scores, gold, [0.3, 0.5, 0.7], SweepObjective("kappa"))
        assert {value for _, value in result.curve} == {1.0}
        assert result.selected == 0.3

    def test_empty_grid(self):
        scores, gold = self._fixture()
        with pytest.raises(EmptyGrid):
            sweep(scores, gold, [], SweepObjective("kappa"))

    def test_missing_prediction(self):
        scores, gold = self._fixture()
        partial = ScoreTable({pair: record for pair, record in scores.records.items() if pair != ("q2", "d2")})
        with pytest.raises(MissingPrediction):
            sweep(partial, gold, [0.5], SweepObjective("kappa"))
        result = sweep(partial, gold, [0.5], SweepObjective("kappa"), missing="zero")
        assert result.selected == 0.5  # absent pair counted as label 0, still perfect here

    def test_runs_required_iff_tau(self):
        scores, gold = self._fixture()
        with pytest.raises(ValueError):
            sweep(scores, gold, [0.5], SweepObjective("tau", MetricSpec("map", 100)))
        runs = {"sysA": Run("sysA", {"q1": (("d1", 1.0),)})}
        with pytest.raises(ValueError):
            sweep(scores, gold, [0.5], SweepObjective("kappa"), runs)

    def test_selected_attains_curve_max(self):
        rng = random.Random(47)
        for _ in range(30):
            pairs = [(f"q{i % 4}", f"d{i}") for i in range(24)]
            gold = BinaryQrels({pair: rng.randint(0, 1) for pair in pairs})
            if len(set(gold.entries.values())) < 2:
                continue
            scores = _score_only({pair: rng.random() for pair in pairs})
            grid = ThresholdGrid.unit()
            result = sweep(scores, gold, grid, SweepObjective("kappa"))
            values = [value for _, value in result.curve]
            best = max(values)
            assert dict(result.curve)[result.selected] == best
            assert result.selected == min(theta for theta, value in result.curve if value == best)

    def test_kappa_curve_matches_manual_computation(self):
        scores, gold = self._fixture()
        result = sweep(scores, gold, [0.2, 0.5], SweepObjective("kappa"))
        for theta, value in result.curve:
            manual = cohen_kappa(confusion(judge_threshold(scores, theta), gold))
            assert value == manual

    def test_rerun_is_bit_identical(self):
        scores, gold = self._fixture()
        first = sweep(scores, gold, ThresholdGrid.unit(), SweepObjective("kappa"))
        second = sweep(scores, gold, ThresholdGrid.unit(), SweepObjective("kappa"))
        assert first == second

    def test_threaded_matches_sequential(self):
        scores, gold = self._fixture()
        sequential = sweep(scores, gold, ThresholdGrid.unit(), SweepObjective("kappa"))
        threaded = sweep(scores, gold, ThresholdGrid.unit(), SweepObjective("kappa"), max_workers=4)
        assert sequential == threaded

    def test_tau_objective(self):
        # two systems over two topics; the better system ranks the relevant doc first
        gold = BinaryQrels({("q1", "d1"): 1, ("q1", "d2"): 0, ("q2", "d3"): 1, ("q2", "d4"): 0})
        scores = _score_only({pair: (0.8 if label else 0.2) for pair, label in gold.entries.items()})
        good = Run("good", {"q1": (("d1", 2.0), ("d2", 1.0)), "q2": (("d3", 2.0), ("d4", 1.0))})
        bad = Run("bad", {"q1": (("d1", 1.0), ("d2", 2.0)), "q2": (("d3", 1.0), ("d4", 2.0))})
        mediocre = Run("mid", {"q1": (("d1", 2.0), ("d2", 1.0)), "q2": (("d3", 1.0), ("d4", 2.0))})
        runs = {"good": good, "bad": bad, "mid": mediocre}
        result = sweep(scores, gold, [0.5], SweepObjective("tau", MetricSpec("map", 100)), runs)
        # at theta 0.5 predictions equal gold, so the orderings agree perfectly
        assert result.curve == ((0.5, 1.0),)


class TestSweepResult:
    def test_selected_must_match_curve(self):
        with pytest.raises(ValueError):
            SweepResult(curve=((0.1, 0.5), (0.2, 0.9)), selected=0.1)

    def test_round_trip_dict(self):
        result = SweepResult(curve=((0.1, 0.5), (0.2, 0.9)), selected=0.2)
        assert SweepResult.from_dict(result.to_dict()) == result


class TestTransfer:
    def test_default_preset_assignments(self):
        plan = TransferPlan.preset("trecdl-paper")
        assert plan.assignments == {"19": "20", "20": "19", "21": "22", "22": "21", "23": "22"}

    def test_apply_default_plan(self):
        def result(theta: float) -> SweepResult:
            return SweepResult(curve=((theta, 1.0),), selected=theta)

        per_source = {"19": result(0.4), "20": result(0.6), "21": result(0.3), "22": result(0.7)}
        got = apply_transfer(TransferPlan.preset("trecdl-paper"), per_source)
        assert got == {"20": 0.4, "19": 0.6, "22": 0.3, "21": 0.7, "23": 0.7}

    def test_empty_plan(self):
        assert apply_transfer(TransferPlan({}), {}) == {}

    def test_missing_source(self):
        plan = TransferPlan({"a": "b"})
        with pytest.raises(MissingSource):
            apply_transfer(plan, {})

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            TransferPlan.preset("nonsense")


class TestTokenMap:
    def test_default_tokens(self):
        assert TokenMap().entries == {"true": 1, "false": 0}

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TokenMap({})

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            TokenMap({"true": 2})
