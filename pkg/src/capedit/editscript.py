"""Word-level edit scripts between caption pairs.

A script is an ordered sequence over {KEEP, DELETE, ADD(word)}: KEEP and
DELETE each consume one source token, ADD emits one new word. KEEP costs
nothing; DELETE and ADD count as one editing step each, so a minimal script
has len(src) + len(dst) - 2*LCS(src, dst) non-KEEP steps.

Among equally minimal scripts the canonical one is chosen by walking from
the sentence front and preferring KEEP, then DELETE, then ADD whenever the
choice stays on a minimum-cost path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .errors import LengthMismatchError

KEEP = "KEEP"
DELETE = "DELETE"
ADD = "ADD"

_TERMINAL_PUNCT = frozenset(".,!?")

_CODE_TO_OP = {kernels.OP_KEEP: KEEP, kernels.OP_DELETE: DELETE, kernels.OP_ADD: ADD}


def tokenize(text: str) -> list[str]:
    """Lowercase and whitespace-split, detaching terminal punctuation.

    A chunk's trailing run of . , ! ? becomes separate tokens:
    "A dog runs." -> ["a", "dog", "runs", "."]. Internal punctuation is
    left alone.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        tail: list[str] = []
        while chunk and chunk[-1] in _TERMINAL_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def detokenize(tokens: Iterable[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class EditOp:
    """One edit operation; ``word`` is present exactly for ADD."""

    op: str
    word: str | None = None

    def __post_init__(self):
        if self.op not in (KEEP, DELETE, ADD):
            raise ValueError(f"unknown op {self.op!r}")
        if self.op == ADD:
            if not isinstance(self.word, str) or not self.word:
                raise ValueError("ADD requires a non-empty word")
        elif self.word is not None:
            raise ValueError(f"{self.op} carries no word")

    def to_json(self) -> dict:
        if self.op == ADD:
            return {"op": ADD, "word": self.word}
        return {"op": self.op}

    @classmethod
    def from_json(cls, obj: dict) -> "EditOp":
        return cls(obj["op"], obj.get("word"))


@dataclass(frozen=True)
class EditScript:
    """An ordered tuple of EditOps with apply/serialize helpers."""

    ops: tuple[EditOp, ...]

    @property
    def keeps(self) -> int:
        return sum(1 for o in self.ops if o.op == KEEP)

    @property
    def deletes(self) -> int:
        return sum(1 for o in self.ops if o.op == DELETE)

    @property
    def adds(self) -> int:
        return sum(1 for o in self.ops if o.op == ADD)

    @property
    def steps(self) -> int:
        """Editing steps: the non-KEEP op count."""
        return self.deletes + self.adds

    @property
    def source_len(self) -> int:
        return self.keeps + self.deletes

    @property
    def target_len(self) -> int:
        return self.keeps + self.adds

    def apply(self, src: Sequence[str]) -> list[str]:
        """Run the script over ``src``, returning the edited token list.

        The script must consume the source exactly: KEEP/DELETE ops in
        source order, one token each.
        """
        if len(src) != self.source_len:
            raise LengthMismatchError(
                f"script consumes {self.source_len} tokens, source has {len(src)}"
            )
        out: list[str] = []
        i = 0
        for op in self.ops:
            if op.op == KEEP:
                out.append(src[i])
                i += 1
            elif op.op == DELETE:
                i += 1
            else:
                out.append(op.word)  # type: ignore[arg-type]
        return out

    def to_json(self) -> list[dict]:
        return [op.to_json() for op in self.ops]

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "EditScript":
        return cls(tuple(EditOp.from_json(obj) for obj in data))


def min_edit_script(src: Sequence[str], dst: Sequence[str]) -> EditScript:
    """Canonical minimal edit script turning ``src`` into ``dst``."""
    codes = kernels.op_codes(src, dst)
    ops: list[EditOp] = []
    j = 0
    for code in codes:
        op = _CODE_TO_OP[code]
        if op == ADD:
            ops.append(EditOp(ADD, dst[j]))
            j += 1
        else:
            ops.append(EditOp(op))
            if op == KEEP:
                j += 1
    return EditScript(tuple(ops))


def apply_script(src: Sequence[str], script: EditScript) -> list[str]:
    return script.apply(src)


def edit_distance(src: Sequence[str], dst: Sequence[str]) -> int:
    """Minimum number of editing steps (non-KEEP ops) from src to dst."""
    return kernels.edit_distance_tokens(src, dst)
