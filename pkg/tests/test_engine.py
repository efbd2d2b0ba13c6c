import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capedit.editscript import ADD, DELETE, KEEP, min_edit_script
from capedit.engine import (
    MASK,
    EditorState,
    ExpansionConfig,
    KeepAllPolicy,
    RoundTrace,
    TracePolicy,
    expand_instance,
    oracle_policy,
    run_inserter,
    run_rounds,
    run_tagger_add,
    run_tagger_del,
)
from capedit.errors import PolicyContractError

TOKENS = st.lists(st.sampled_from(["a", "b", "cat", "dog", "sat", "mat"]), max_size=9)


def place_masks(tokens, labels):
    """Independent re-statement of slot semantics: slot 0 is the front,
    slot i+1 follows token i; an ADD slot gets one mask after its anchor."""
    out = []
    if labels[0] == ADD:
        out.append(MASK)
    for tok, lab in zip(tokens, labels[1:]):
        out.append(tok)
        if lab == ADD:
            out.append(MASK)
    return out


def fill_masks(masked, words):
    it = iter(words)
    return [next(it) if t == MASK else t for t in masked]


class TestStages:
    def test_tagger_del_applies_labels(self, worked_pair):
        src, dst = worked_pair
        state, labels = run_tagger_del(EditorState(list(src)), oracle_policy(src, dst))
        assert labels == [KEEP, KEEP, DELETE, DELETE, KEEP, DELETE, DELETE]
        assert state.tokens == ["motorcyclists", "are", "a"]
        assert state.round == 1

    def test_tagger_add_first_round_masks(self, worked_pair):
        src, dst = worked_pair
        policy = oracle_policy(src, dst)
        state, _ = run_tagger_del(EditorState(list(src)), policy)
        masked, slot_labels = run_tagger_add(state, policy)
        # "in" goes after "are", "close" after "a"
        assert masked == ["motorcyclists", "are", MASK, "a", MASK]
        assert slot_labels == [KEEP, KEEP, ADD, ADD]

    def test_inserter_fills_in_order(self, worked_pair):
        src, dst = worked_pair
        policy = oracle_policy(src, dst)
        state, _ = run_tagger_del(EditorState(list(src)), policy)
        masked, _ = run_tagger_add(state, policy)
        tokens, words = run_inserter(masked, policy)
        assert words == ["in", "close"]
        assert tokens == ["motorcyclists", "are", "in", "a", "close"]

    def test_front_slot_insertion(self):
        src = ["world"]
        dst = ["hello", "world"]
        policy = oracle_policy(src, dst)
        state, _ = run_tagger_del(EditorState(list(src)), policy)
        masked, slot_labels = run_tagger_add(state, policy)
        assert masked == [MASK, "world"]
        assert slot_labels == [ADD, KEEP]


class _BadPolicy:
    """Configurable misbehaving policy for contract tests."""

    def __init__(self, del_labels=None, add_labels=None, words=None):
        self._del = del_labels
        self._add = add_labels
        self._words = words

    def tag_del(self, ctx, tokens):
        return self._del if self._del is not None else [KEEP] * len(tokens)

    def tag_add(self, ctx, tokens):
        return self._add if self._add is not None else [KEEP] * (len(tokens) + 1)

    def insert(self, ctx, masked):
        return self._words if self._words is not None else []


class TestPolicyContract:
    def test_del_label_count_mismatch(self):
        with pytest.raises(PolicyContractError):
            run_tagger_del(EditorState(["a", "b"]), _BadPolicy(del_labels=[KEEP]))

    def test_del_label_vocabulary(self):
        with pytest.raises(PolicyContractError):
            run_tagger_del(EditorState(["a"]), _BadPolicy(del_labels=["ADD"]))

    def test_add_label_count_mismatch(self):
        with pytest.raises(PolicyContractError):
            run_tagger_add(EditorState(["a", "b"], round=1), _BadPolicy(add_labels=[KEEP, ADD]))

    def test_add_label_vocabulary(self):
        with pytest.raises(PolicyContractError):
            run_tagger_add(EditorState(["a"], round=1), _BadPolicy(add_labels=[KEEP, "DELETE"]))

    def test_insert_word_count_mismatch(self):
        with pytest.raises(PolicyContractError):
            run_inserter(["a", MASK], _BadPolicy(words=["x", "y"]))

    def test_insert_invalid_word(self):
        with pytest.raises(PolicyContractError):
            run_inserter(["a", MASK], _BadPolicy(words=[""]))
        with pytest.raises(PolicyContractError):
            run_inserter(["a", MASK], _BadPolicy(words=[MASK]))


class TestRunRounds:
    def test_worked_example_full_run(self, worked_pair):
        src, dst = worked_pair
        out, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=6))
        assert out == dst
        assert trace.converged
        assert len(trace.rounds) == 6  # 5 insertion rounds + the stopping pass
        assert [r.inserted for r in trace.rounds] == [
            ["in", "close"],
            ["race"],
            ["around"],
            ["a"],
            ["corner"],
            [],
        ]
        assert trace.rounds[-1].result == dst
        assert all(l == KEEP for l in trace.rounds[-1].add_slots)

    def test_exact_budget_reconstructs_without_convergence_flag(self, worked_pair):
        src, dst = worked_pair
        out, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=5))
        assert out == dst
        assert not trace.converged

    def test_clamped_run_is_partial(self, worked_pair):
        src, dst = worked_pair
        out, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=4))
        assert out == ["motorcyclists", "are", "in", "a", "close", "race", "around", "a"]
        assert not trace.converged
        assert len(trace.rounds) == 4

    def test_keep_all_converges_immediately(self):
        src = ["a", "dog", "runs"]
        out, trace = run_rounds(src, KeepAllPolicy())
        assert out == src
        assert trace.converged
        assert len(trace.rounds) == 1
        assert trace.rounds[0].inserted == []

    def test_identical_pair_oracle(self):
        src = ["same", "words"]
        out, trace = run_rounds(src, oracle_policy(src, src))
        assert out == src
        assert trace.converged
        assert len(trace.rounds) == 1

    def test_rebuild_from_empty(self):
        src = ["x"]
        dst = ["a", "b"]
        out, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=4))
        assert out == dst
        assert trace.converged
        assert trace.del_labels == [DELETE]
        assert trace.rounds[0].result == ["a"]
        assert trace.rounds[1].result == ["a", "b"]


class TestOracleCompleteness:
    @settings(max_examples=200, deadline=None)
    @given(TOKENS, TOKENS)
    def test_reconstructs_any_pair(self, src, dst):
        gaps = gap_sizes(src, dst)
        budget = max(gaps, default=0) + 1
        out, trace = run_rounds(
            src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=budget)
        )
        assert out == dst
        assert trace.converged
        assert trace.replay() == dst

    @settings(max_examples=200, deadline=None)
    @given(TOKENS, TOKENS)
    def test_monotone_length_and_single_masks(self, src, dst):
        _, trace = run_rounds(
            src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=16)
        )
        tokens = [t for t, l in zip(trace.source, trace.del_labels) if l == KEEP]
        prev_len = len(tokens)
        for rec in trace.rounds:
            # no two masks may ever be adjacent: each mask follows its own anchor
            masked = place_masks(tokens, rec.add_slots)
            assert all(not (x == MASK and y == MASK) for x, y in zip(masked, masked[1:]))
            assert len(rec.result) >= prev_len
            prev_len = len(rec.result)
            tokens = rec.result


def gap_sizes(src, dst):
    """ADD-run lengths of the canonical script, split at KEEP boundaries."""
    sizes = []
    run = 0
    for op in min_edit_script(src, dst).ops:
        if op.op == ADD:
            run += 1
        elif op.op == KEEP:
            sizes.append(run)
            run = 0
    sizes.append(run)
    return [g for g in sizes if g > 0]


class TestTraceSerialization:
    def test_round_trip(self, worked_pair):
        src, dst = worked_pair
        _, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=6))
        clone = RoundTrace.from_json(trace.to_json(), src)
        assert clone.del_labels == trace.del_labels
        assert clone.converged == trace.converged
        assert [r.add_slots for r in clone.rounds] == [r.add_slots for r in trace.rounds]
        assert [r.inserted for r in clone.rounds] == [r.inserted for r in trace.rounds]
        assert clone.final() == trace.final()
        assert clone.replay() == dst

    def test_replay_detects_tampered_insertions(self, worked_pair):
        src, dst = worked_pair
        _, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=6))
        obj = trace.to_json()
        obj["rounds"][1]["inserted"] = ["race", "extra"]
        with pytest.raises(PolicyContractError):
            RoundTrace.from_json(obj, src).replay()

    def test_replay_detects_tampered_result(self, worked_pair):
        src, dst = worked_pair
        _, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=6))
        obj = trace.to_json()
        obj["rounds"][0]["result"] = "motorcyclists are on a close"
        with pytest.raises(PolicyContractError):
            RoundTrace.from_json(obj, src).replay()

    def test_final_without_rounds_is_post_delete_state(self, worked_pair):
        src, _ = worked_pair
        trace = RoundTrace(list(src), [KEEP, KEEP, DELETE, DELETE, KEEP, DELETE, DELETE])
        assert trace.final() == ["motorcyclists", "are", "a"]


class TestTracePolicy:
    def test_replays_recorded_run(self, worked_pair):
        src, dst = worked_pair
        _, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=6))
        out, replay_trace = run_rounds(
            src, TracePolicy(trace), config=ExpansionConfig(max_rounds=6)
        )
        assert out == dst
        assert replay_trace.to_json() == trace.to_json()

    @settings(max_examples=100, deadline=None)
    @given(TOKENS, TOKENS)
    def test_round_trips_random_pairs(self, src, dst):
        _, trace = run_rounds(src, oracle_policy(src, dst), config=ExpansionConfig(max_rounds=16))
        out, replay_trace = run_rounds(src, TracePolicy(trace), config=ExpansionConfig(max_rounds=16))
        assert out == trace.final()
        assert replay_trace.to_json() == trace.to_json()


class TestExpansionConfig:
    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            ExpansionConfig(keep_weight=0.0)
        with pytest.raises(ValueError):
            ExpansionConfig(keep_weight=-1.0)

    def test_rejects_zero_rounds(self):
        with pytest.raises(ValueError):
            ExpansionConfig(max_rounds=0)


class TestExpansion:
    def test_worked_example_counts(self, worked_pair):
        src, dst = worked_pair
        samples = expand_instance(src, dst, ExpansionConfig(max_rounds=16))
        assert len(samples) == 1 + 2 * 5  # largest gap needs five words
        stages = [s.stage for s in samples]
        assert stages == ["tagger_del"] + ["tagger_add", "inserter"] * 5

    def test_clamped_by_round_budget(self, worked_pair):
        src, dst = worked_pair
        samples = expand_instance(src, dst, ExpansionConfig(max_rounds=2))
        assert len(samples) == 1 + 2 * 2

    def test_identical_pair_two_samples(self):
        samples = expand_instance(["a", "b"], ["a", "b"])
        assert [s.stage for s in samples] == ["tagger_del", "tagger_add"]
        assert all(l == KEEP for l in samples[0].labels)
        assert all(l == KEEP for l in samples[1].labels)
        assert samples[1].targets is None

    @pytest.mark.parametrize("lam", [1.0, 1.2, 1.5, 2.0])
    def test_keep_weight_tagging(self, worked_pair, lam):
        src, dst = worked_pair
        samples = expand_instance(src, dst, ExpansionConfig(keep_weight=lam, max_rounds=16))
        for s in samples:
            if s.stage == "inserter":
                assert s.targets is not None
                assert s.weights == (1.0,) * len(s.targets)
            else:
                for label, weight in zip(s.labels, s.weights):
                    assert weight == (lam if label == KEEP else 1.0)

    def test_del_sample_matches_script(self, worked_pair):
        src, dst = worked_pair
        s = expand_instance(src, dst)[0]
        assert s.tokens == tuple(src)
        assert list(s.labels) == [KEEP, KEEP, DELETE, DELETE, KEEP, DELETE, DELETE]
        assert s.round == 0

    @settings(max_examples=150, deadline=None)
    @given(TOKENS, TOKENS)
    def test_targets_replay_oracle_states(self, src, dst):
        cfg = ExpansionConfig(max_rounds=16)
        samples = expand_instance(src, dst, cfg)
        _, trace = run_rounds(src, oracle_policy(src, dst), config=cfg)

        gaps = gap_sizes(src, dst)
        expected = 2 if not gaps else 1 + 2 * max(gaps)
        assert len(samples) == expected

        state = [t for t, l in zip(samples[0].tokens, samples[0].labels) if l == KEEP]
        round_samples = samples[1:]
        for k in range(0, len(round_samples), 2):
            tag = round_samples[k]
            assert tag.stage == "tagger_add"
            assert list(tag.tokens) == state
            if tag.targets is None and k + 1 >= len(round_samples):
                break
            ins = round_samples[k + 1]
            assert ins.stage == "inserter"
            masked = place_masks(state, list(tag.labels))
            assert list(ins.tokens) == masked
            state = fill_masks(masked, list(ins.targets))
            assert state == trace.rounds[k // 2].result

    def test_json_shape(self, worked_pair):
        src, dst = worked_pair
        samples = expand_instance(src, dst)
        del_obj = samples[0].to_json()
        assert set(del_obj) == {"stage", "tokens", "labels", "weights", "round"}
        ins_obj = next(s for s in samples if s.stage == "inserter").to_json()
        assert set(ins_obj) == {"stage", "tokens", "labels", "weights", "round", "targets"}
