"""Multi-round tag-and-insert caption editing.

One editing run is a single delete pass followed by iterated add rounds:

    round 0: tag_del labels every source token KEEP or DELETE; deletions
             are applied immediately.
    round r (r >= 1): tag_add labels the slot after every current token
             (plus the front slot 0) KEEP or ADD; a mask is placed in each
             ADD slot and the inserter fills every mask with one word.

The run converges when a tag_add pass predicts no ADD slot; that pass is
still recorded, so a converged trace always ends with an all-KEEP round.
Convergence is observed, never assumed: hitting max_rounds first returns
the best-effort sentence with converged=False.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

from .editscript import ADD, DELETE, KEEP, detokenize, min_edit_script, tokenize
from .errors import PolicyContractError

MASK = "[MASK]"

_DEL_LABELS = frozenset((KEEP, DELETE))
_ADD_LABELS = frozenset((KEEP, ADD))


class Policy(Protocol):
    """Decision source for one editing run.

    ``ctx`` is an opaque per-instance context (e.g. a record id); the
    engine passes it through untouched. Implementations must be safe to
    use concurrently across instances or be constructed per worker.
    """

    def tag_del(self, ctx, tokens: Sequence[str]) -> Sequence[str]:
        """One KEEP/DELETE label per token."""
        ...

    def tag_add(self, ctx, tokens: Sequence[str]) -> Sequence[str]:
        """len(tokens)+1 KEEP/ADD slot labels; slot 0 is the front."""
        ...

    def insert(self, ctx, masked: Sequence[str]) -> Sequence[str]:
        """One word per mask, in left-to-right mask order."""
        ...


@dataclass
class EditorState:
    tokens: list[str]
    round: int = 0
    converged: bool = False


@dataclass
class RoundRecord:
    add_slots: list[str]
    inserted: list[str]
    result: list[str]


@dataclass
class RoundTrace:
    """Full record of one editing run, sufficient to replay it."""

    source: list[str]
    del_labels: list[str]
    rounds: list[RoundRecord] = field(default_factory=list)
    converged: bool = False

    def final(self) -> list[str]:
        if self.rounds:
            return list(self.rounds[-1].result)
        return [t for t, l in zip(self.source, self.del_labels) if l == KEEP]

    def replay(self) -> list[str]:
        """Re-derive the final sentence from the recorded decisions.

        Raises PolicyContractError if any recorded step is inconsistent
        with the sentence it applies to.
        """
        tokens = _apply_del(self.source, self.del_labels)
        for rec in self.rounds:
            masked = _place_masks(tokens, rec.add_slots)
            n_masks = masked.count(MASK)
            if n_masks != len(rec.inserted):
                raise PolicyContractError(
                    f"recorded round inserts {len(rec.inserted)} words into {n_masks} masks"
                )
            tokens = _fill_masks(masked, rec.inserted)
            if tokens != rec.result:
                raise PolicyContractError("recorded round result does not match replay")
        return tokens

    def to_json(self) -> dict:
        return {
            "del": list(self.del_labels),
            "rounds": [
                {
                    "add_slots": list(r.add_slots),
                    "inserted": list(r.inserted),
                    "result": detokenize(r.result),
                }
                for r in self.rounds
            ],
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, obj: dict, source: Sequence[str]) -> "RoundTrace":
        rounds = [
            RoundRecord(list(r["add_slots"]), list(r["inserted"]), tokenize(r["result"]))
            for r in obj["rounds"]
        ]
        return cls(list(source), list(obj["del"]), rounds, bool(obj["converged"]))


@dataclass(frozen=True)
class ExpansionConfig:
    """Knobs shared by the engine and training-sample expansion.

    keep_weight is the cross-entropy weight placed on KEEP labels relative
    to 1.0 on DELETE/ADD labels (the lambda grid runs 1.0 to 2.0, default
    1.5). max_rounds bounds the number of add rounds.
    """

    keep_weight: float = 1.5
    max_rounds: int = 4

    def __post_init__(self):
        if not (self.keep_weight > 0):
            raise ValueError(f"keep_weight must be positive, got {self.keep_weight}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")


def _validate_labels(labels, expected_len: int, allowed: frozenset, what: str) -> list[str]:
    labels = list(labels)
    if len(labels) != expected_len:
        raise PolicyContractError(f"{what} returned {len(labels)} labels, expected {expected_len}")
    for l in labels:
        if l not in allowed:
            raise PolicyContractError(f"{what} returned invalid label {l!r}")
    return labels


def _apply_del(tokens: Sequence[str], labels: Sequence[str]) -> list[str]:
    return [t for t, l in zip(tokens, labels) if l == KEEP]


def _place_masks(tokens: Sequence[str], slot_labels: Sequence[str]) -> list[str]:
    out: list[str] = []
    if slot_labels[0] == ADD:
        out.append(MASK)
    for t, l in zip(tokens, slot_labels[1:]):
        out.append(t)
        if l == ADD:
            out.append(MASK)
    return out


def _fill_masks(masked: Sequence[str], words: Sequence[str]) -> list[str]:
    out: list[str] = []
    k = 0
    for t in masked:
        if t == MASK:
            out.append(words[k])
            k += 1
        else:
            out.append(t)
    return out


def run_tagger_del(state: EditorState, policy: Policy, ctx=None) -> tuple[EditorState, list[str]]:
    """Apply the delete pass; returns the post-deletion state and labels."""
    if state.round != 0:
        raise PolicyContractError(f"tag_del only runs at round 0, state is at {state.round}")
    labels = _validate_labels(
        policy.tag_del(ctx, state.tokens), len(state.tokens), _DEL_LABELS, "tag_del"
    )
    return EditorState(_apply_del(state.tokens, labels), round=1), labels


def run_tagger_add(state: EditorState, policy: Policy, ctx=None) -> tuple[list[str], list[str]]:
    """Tag insertion slots; returns (masked sequence, slot labels)."""
    if state.round < 1:
        raise PolicyContractError("tag_add runs after the delete pass")
    labels = _validate_labels(
        policy.tag_add(ctx, state.tokens), len(state.tokens) + 1, _ADD_LABELS, "tag_add"
    )
    return _place_masks(state.tokens, labels), labels


def run_inserter(masked: Sequence[str], policy: Policy, ctx=None) -> tuple[list[str], list[str]]:
    """Fill every mask; returns (new tokens, inserted words)."""
    n_masks = list(masked).count(MASK)
    if n_masks == 0:
        raise PolicyContractError("inserter invoked with no masks")
    words = list(policy.insert(ctx, masked))
    if len(words) != n_masks:
        raise PolicyContractError(f"inserter returned {len(words)} words for {n_masks} masks")
    for w in words:
        if not isinstance(w, str) or not w or w.split() != [w] or w == MASK:
            raise PolicyContractError(f"inserter returned invalid word {w!r}")
    return _fill_masks(masked, words), words


def run_rounds(
    source: Sequence[str],
    policy: Policy,
    ctx=None,
    config: ExpansionConfig = ExpansionConfig(),
) -> tuple[list[str], RoundTrace]:
    """Run one full editing pass; returns (final tokens, trace)."""
    state = EditorState(list(source), round=0)
    state, del_labels = run_tagger_del(state, policy, ctx)
    trace = RoundTrace(list(source), del_labels)
    while True:
        masked, slot_labels = run_tagger_add(state, policy, ctx)
        if MASK not in masked:
            trace.converged = True
            trace.rounds.append(RoundRecord(slot_labels, [], list(state.tokens)))
            break
        tokens, words = run_inserter(masked, policy, ctx)
        trace.rounds.append(RoundRecord(slot_labels, words, tokens))
        if state.round >= config.max_rounds:
            break
        state = EditorState(tokens, round=state.round + 1)
    return trace.final(), trace


class _GapPlan:
    """Kept-token skeleton plus per-gap insertion queues for a known pair.

    Derived from the canonical minimal edit script: gap i holds the words
    added between kept token i-1 and kept token i (gap 0 is the front).
    Round r inserts word r of every gap still needing one, anchored on the
    word materialized in round r-1 (the neighboring kept token, or the
    front slot, in round 1).
    """

    def __init__(self, source: Sequence[str], target: Sequence[str]):
        script = min_edit_script(source, target)
        self.source = list(source)
        self.target = list(target)
        self.del_labels: list[str] = []
        self.kept: list[str] = []
        self.gaps: list[list[str]] = [[]]
        for op in script.ops:
            if op.op == KEEP:
                self.del_labels.append(KEEP)
                self.kept.append(self.source[len(self.del_labels) - 1])
                self.gaps.append([])
            elif op.op == DELETE:
                self.del_labels.append(DELETE)
            else:
                self.gaps[-1].append(op.word)  # type: ignore[arg-type]
        self.max_gap = max(len(g) for g in self.gaps)

    def schedule(self, r: int) -> tuple[list[str], list[str], list[str]]:
        """Plan add round r; returns (start tokens, slot labels, words).

        The start tokens are the sentence entering round r (gaps filled up
        to r-1 words); labels cover the front slot plus one slot per token.
        """
        prev: list[str] = []
        add_slots: set[int] = set()
        words: list[str] = []

        def emit_gap(i: int) -> None:
            prev.extend(self.gaps[i][: r - 1])
            if len(self.gaps[i]) >= r:
                add_slots.add(len(prev))
                words.append(self.gaps[i][r - 1])

        emit_gap(0)
        for k, tok in enumerate(self.kept):
            prev.append(tok)
            emit_gap(k + 1)
        labels = [ADD if s in add_slots else KEEP for s in range(len(prev) + 1)]
        return prev, labels, words


class OraclePolicy:
    """Deterministic policy reconstructing a known target over rounds.

    Stateful across one run: tag_del resets the round counter, each
    tag_add advances it. The engine drives runs in that order, so a
    single instance can be reused for repeated runs on its own pair.
    """

    def __init__(self, source: Sequence[str], target: Sequence[str]):
        self._plan = _GapPlan(source, target)
        self._round = 0
        self._pending: list[str] = []

    @property
    def rounds_needed(self) -> int:
        """Add rounds required for full reconstruction (largest gap)."""
        return self._plan.max_gap

    def tag_del(self, ctx, tokens: Sequence[str]) -> list[str]:
        if list(tokens) != self._plan.source:
            raise PolicyContractError("oracle applied to a different source sentence")
        self._round = 0
        return list(self._plan.del_labels)

    def tag_add(self, ctx, tokens: Sequence[str]) -> list[str]:
        self._round += 1
        prev, labels, words = self._plan.schedule(self._round)
        if list(tokens) != prev:
            raise PolicyContractError("oracle lost sync with the editing state")
        self._pending = words
        return labels

    def insert(self, ctx, masked: Sequence[str]) -> list[str]:
        if len(self._pending) != list(masked).count(MASK):
            raise PolicyContractError("oracle has no insertion plan for this mask layout")
        return list(self._pending)


class KeepAllPolicy:
    """Touch nothing: all-KEEP tags, never inserts."""

    def tag_del(self, ctx, tokens: Sequence[str]) -> list[str]:
        return [KEEP] * len(tokens)

    def tag_add(self, ctx, tokens: Sequence[str]) -> list[str]:
        return [KEEP] * (len(tokens) + 1)

    def insert(self, ctx, masked: Sequence[str]) -> list[str]:
        raise PolicyContractError("keep-all policy never inserts")


class TracePolicy:
    """Replays the decisions of a stored RoundTrace.

    Rounds beyond the recorded ones tag all-KEEP, so the engine converges
    exactly where the trace did.
    """

    def __init__(self, trace: RoundTrace):
        self._trace = trace
        self._round = 0
        self._pending: list[str] = []

    def tag_del(self, ctx, tokens: Sequence[str]) -> list[str]:
        if len(self._trace.del_labels) != len(tokens):
            raise PolicyContractError(
                f"trace has {len(self._trace.del_labels)} delete labels "
                f"for a {len(tokens)}-token sentence"
            )
        self._round = 0
        return list(self._trace.del_labels)

    def tag_add(self, ctx, tokens: Sequence[str]) -> list[str]:
        self._round += 1
        if self._round > len(self._trace.rounds):
            return [KEEP] * (len(tokens) + 1)
        rec = self._trace.rounds[self._round - 1]
        if len(rec.add_slots) != len(tokens) + 1:
            raise PolicyContractError(
                f"trace round {self._round} has {len(rec.add_slots)} slot labels "
                f"for a {len(tokens)}-token sentence"
            )
        self._pending = list(rec.inserted)
        return list(rec.add_slots)

    def insert(self, ctx, masked: Sequence[str]) -> list[str]:
        if len(self._pending) != list(masked).count(MASK):
            raise PolicyContractError("trace insertion count does not match mask layout")
        return self._pending


def oracle_policy(source: Sequence[str], target: Sequence[str]) -> OraclePolicy:
    return OraclePolicy(source, target)


@dataclass(frozen=True)
class TrainingSample:
    """One expanded training sample.

    For tagger stages, labels/weights align with the tokens (tag_add has
    the extra front slot first); for the inserter stage, tokens is the
    masked sequence, targets holds one word per mask, and weights align
    with targets.
    """

    stage: str  # "tagger_del" | "tagger_add" | "inserter"
    tokens: tuple[str, ...]
    labels: tuple[str, ...]
    weights: tuple[float, ...]
    round: int
    targets: Optional[tuple[str, ...]] = None

    def to_json(self) -> dict:
        obj = {
            "stage": self.stage,
            "tokens": list(self.tokens),
            "labels": list(self.labels),
            "weights": list(self.weights),
            "round": self.round,
        }
        if self.targets is not None:
            obj["targets"] = list(self.targets)
        return obj


def expand_instance(
    source: Sequence[str],
    target: Sequence[str],
    config: ExpansionConfig = ExpansionConfig(),
) -> list[TrainingSample]:
    """Expand one (ref, gt) pair into per-round training samples.

    Emits one tagger_del sample, then one (tagger_add, inserter) pair per
    add round, clamped to config.max_rounds. A pair needing no insertion
    at all gets a single all-KEEP tagger_add sample instead, teaching the
    stopping decision; when insertion rounds exist the stop is implied by
    the final round's targets, so no trailing all-KEEP sample is emitted.

    KEEP labels weigh config.keep_weight, DELETE/ADD labels 1.0, inserter
    targets 1.0.
    """
    plan = _GapPlan(source, target)

    def w(label: str) -> float:
        return config.keep_weight if label == KEEP else 1.0

    samples = [
        TrainingSample(
            stage="tagger_del",
            tokens=tuple(plan.source),
            labels=tuple(plan.del_labels),
            weights=tuple(w(l) for l in plan.del_labels),
            round=0,
        )
    ]
    if plan.max_gap == 0:
        labels = [KEEP] * (len(plan.kept) + 1)
        samples.append(
            TrainingSample(
                stage="tagger_add",
                tokens=tuple(plan.kept),
                labels=tuple(labels),
                weights=tuple(w(l) for l in labels),
                round=1,
            )
        )
        return samples
    for r in range(1, min(plan.max_gap, config.max_rounds) + 1):
        prev, labels, words = plan.schedule(r)
        samples.append(
            TrainingSample(
                stage="tagger_add",
                tokens=tuple(prev),
                labels=tuple(labels),
                weights=tuple(w(l) for l in labels),
                round=r,
            )
        )
        masked = _place_masks(prev, labels)
        samples.append(
            TrainingSample(
                stage="inserter",
                tokens=tuple(masked),
                labels=(),
                weights=(1.0,) * len(words),
                round=r,
                targets=tuple(words),
            )
        )
    return samples
