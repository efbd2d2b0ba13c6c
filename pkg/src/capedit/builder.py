"""Dataset construction for caption-editing corpora.

COCO-EE-style instances come from a per-image filter cascade over a pool
of same-split captions: rank the pool by an ingested image-caption
similarity score, keep the top-k, draw a seeded random sample, keep
candidates that overlap some ground-truth candidate on BLEU-2/BLEU-3 but
stay semantically distant on an ingested SPICE score, then pair each
survivor with its minimum-edit-distance ground-truth caption.

Flickr30K-EE-style instances pair the contradiction and entailment
hypotheses written for one (image, premise).

Similarity model internals are out of scope; scores arrive in tables and
every lookup an active filter needs must be present.
"""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .editscript import detokenize, edit_distance, tokenize
from .errors import MissingScoreError
from .metrics import bleu_all

SPLITS = ("train", "val", "test")

SCORE_KINDS = ("image_caption_similarity", "caption_spice")


@dataclass(frozen=True)
class Caption:
    image_id: str
    caption_id: str
    text: str
    is_gt: bool
    split: str


@dataclass(frozen=True)
class ECEInstance:
    """One editing instance: reference caption to edit toward ground truth."""

    image_id: str
    ref: tuple[str, ...]
    gt: tuple[str, ...]
    split: str

    def __post_init__(self):
        object.__setattr__(self, "ref", tuple(self.ref))
        object.__setattr__(self, "gt", tuple(self.gt))
        if not self.ref or not self.gt:
            raise ValueError("ref and gt captions must be non-empty")
        if self.ref == self.gt:
            raise ValueError("ref and gt captions must differ")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "ref": detokenize(self.ref),
            "gt": detokenize(self.gt),
            "split": self.split,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ECEInstance":
        return cls(
            image_id=obj["image_id"],
            ref=tuple(tokenize(obj["ref"])),
            gt=tuple(tokenize(obj["gt"])),
            split=obj["split"],
        )


class ScoreTable:
    """Pair-keyed score lookups; a missing required pair is a hard error."""

    def __init__(self, kind: str, scores: Optional[dict] = None):
        if kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {kind!r}")
        self.kind = kind
        self._scores: dict[tuple[str, str], float] = dict(scores or {})

    def put(self, a: str, b: str, score: float) -> None:
        self._scores[(a, b)] = float(score)

    def get(self, a: str, b: str) -> float:
        try:
            return self._scores[(a, b)]
        except KeyError:
            raise MissingScoreError(self.kind, a, b) from None

    def __len__(self) -> int:
        return len(self._scores)


@dataclass(frozen=True)
class FilterConfig:
    """Cascade thresholds; defaults are the published operating point."""

    topk_similar: int = 300
    sample_k: int = 30
    bleu2_min: float = 0.4
    bleu3_min: float = 0.3
    spice_max: float = 0.35
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("bleu2_min", "bleu3_min", "spice_max"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.sample_k < 1 or self.sample_k > self.topk_similar:
            raise ValueError("need 1 <= sample_k <= topk_similar")


def _image_rng(seed: int, image_id: str) -> random.Random:
    # keyed per image so serial and parallel builds draw identical samples
    digest = hashlib.sha256(f"{seed}:{image_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _build_image(
    image_id: str,
    gt_caps: Sequence[Caption],
    pool: Sequence[Caption],
    image_scores: ScoreTable,
    spice_scores: ScoreTable,
    cfg: FilterConfig,
) -> list[ECEInstance]:
    gt_ids = {g.caption_id for g in gt_caps}
    gt_tokens = [
        (g, tokenize(g.text))
        for g in sorted(gt_caps, key=lambda g: g.caption_id)
        if tokenize(g.text)
    ]
    if not gt_tokens:
        return []
    scored = [
        (image_scores.get(image_id, c.caption_id), c)
        for c in pool
        if c.caption_id not in gt_ids
    ]
    scored.sort(key=lambda t: (-t[0], t[1].caption_id))
    top = [c for _, c in scored[: cfg.topk_similar]]
    rng = _image_rng(cfg.rng_seed, image_id)
    candidates = rng.sample(top, min(cfg.sample_k, len(top)))
    instances: list[ECEInstance] = []
    for cand in candidates:
        cand_toks = tokenize(cand.text)
        if not any(
            b[1] > cfg.bleu2_min and b[2] > cfg.bleu3_min
            for b in (bleu_all([cand_toks], [toks], 3) for _, toks in gt_tokens)
        ):
            continue
        min_spice = min(spice_scores.get(cand.caption_id, g.caption_id) for g, _ in gt_tokens)
        if not min_spice < cfg.spice_max:
            continue
        _, best_toks = min(
            gt_tokens, key=lambda gt: (edit_distance(cand_toks, gt[1]), gt[0].caption_id)
        )
        if cand_toks == best_toks:
            # zero-edit pair: possible only with hand-set scores, nothing to learn
            continue
        instances.append(ECEInstance(image_id, tuple(cand_toks), tuple(best_toks), cand.split))
    return instances


_WORKER: dict = {}


def _init_worker(captions, image_scores, spice_scores, cfg) -> None:
    _WORKER["gt_by_image"] = _gt_by_image(captions)
    _WORKER["pool"] = captions
    _WORKER["image_scores"] = image_scores
    _WORKER["spice_scores"] = spice_scores
    _WORKER["cfg"] = cfg


def _build_image_worker(image_id: str) -> tuple[str, list[ECEInstance]]:
    return image_id, _build_image(
        image_id,
        _WORKER["gt_by_image"][image_id],
        _WORKER["pool"],
        _WORKER["image_scores"],
        _WORKER["spice_scores"],
        _WORKER["cfg"],
    )


def _gt_by_image(captions: Sequence[Caption]) -> dict[str, list[Caption]]:
    out: dict[str, list[Caption]] = {}
    for c in captions:
        if c.is_gt:
            out.setdefault(c.image_id, []).append(c)
    return out


def build_cocoee_split(
    captions: Sequence[Caption],
    image_scores: ScoreTable,
    spice_scores: ScoreTable,
    cfg: FilterConfig,
    jobs: int = 1,
) -> list[ECEInstance]:
    """Run the filter cascade over one split's captions.

    Every caption must belong to the same split. An image's candidate pool
    is all other captions of the split (its own ground-truth candidates
    excluded), so the similarity table must cover each (image, pool
    caption) pair. Output order is by image id, then candidate draw order;
    identical inputs and seed give byte-identical output regardless of
    ``jobs``.
    """
    captions = list(captions)
    if not captions:
        return []
    splits = {c.split for c in captions}
    if len(splits) > 1:
        raise ValueError(f"captions span multiple splits: {sorted(splits)}")
    gt_by_image = _gt_by_image(captions)
    images = sorted(gt_by_image)
    if jobs <= 1 or len(images) <= 1:
        out: list[ECEInstance] = []
        for image_id in images:
            out.extend(
                _build_image(
                    image_id, gt_by_image[image_id], captions, image_scores, spice_scores, cfg
                )
            )
        return out
    results: dict[str, list[ECEInstance]] = {}
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_init_worker,
        initargs=(captions, image_scores, spice_scores, cfg),
    ) as pool:
        for image_id, instances in pool.map(_build_image_worker, images, chunksize=8):
            results[image_id] = instances
    out = []
    for image_id in images:
        out.extend(results[image_id])
    return out


HYPOTHESIS_LABELS = ("entailment", "neutral", "contradiction")


def build_flickr30kee(records: Sequence[dict]) -> list[ECEInstance]:
    """Pair hypotheses into instances, one per (image, premise) group.

    Records are dicts {"image_id","premise_id","label","sentence","split"}.
    A group emits an instance when it has both a contradiction (the ref)
    and an entailment (the gt); the first record of each label wins,
    neutral records are ignored. Degenerate groups (identical or empty
    sentences) are dropped.
    """
    groups: dict[tuple[str, str], dict[str, dict]] = {}
    for rec in records:
        label = rec["label"]
        if label not in HYPOTHESIS_LABELS:
            raise ValueError(f"unknown hypothesis label {label!r}")
        if label == "neutral":
            continue
        key = (rec["image_id"], rec["premise_id"])
        groups.setdefault(key, {}).setdefault(label, rec)
    out: list[ECEInstance] = []
    for (image_id, _premise), by_label in groups.items():
        if "contradiction" not in by_label or "entailment" not in by_label:
            continue
        ref_rec = by_label["contradiction"]
        gt_rec = by_label["entailment"]
        if ref_rec["split"] != gt_rec["split"]:
            raise ValueError(
                f"group ({image_id!r}, {_premise!r}) mixes splits "
                f"{ref_rec['split']!r} and {gt_rec['split']!r}"
            )
        ref = tuple(tokenize(ref_rec["sentence"]))
        gt = tuple(tokenize(gt_rec["sentence"]))
        if not ref or not gt or ref == gt:
            continue
        out.append(ECEInstance(image_id, ref, gt, ref_rec["split"]))
    return out


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    n_images: int
    mean_ref_len: float
    mean_gt_len: float
    mean_edit_distance: float
    vocab_size: int

    def to_json(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "n_images": self.n_images,
            "mean_ref_len": self.mean_ref_len,
            "mean_gt_len": self.mean_gt_len,
            "mean_edit_distance": self.mean_edit_distance,
            "vocab_size": self.vocab_size,
        }


def compute_stats(instances: Iterable[ECEInstance]) -> DatasetStats:
    """Summary statistics over instances; vocabulary spans ref and gt."""
    instances = list(instances)
    if not instances:
        raise ValueError("no instances to summarize")
    vocab: set[str] = set()
    images: set[str] = set()
    ref_len = 0
    gt_len = 0
    dist = 0
    for inst in instances:
        images.add(inst.image_id)
        vocab.update(inst.ref)
        vocab.update(inst.gt)
        ref_len += len(inst.ref)
        gt_len += len(inst.gt)
        dist += edit_distance(inst.ref, inst.gt)
    n = len(instances)
    return DatasetStats(
        n_instances=n,
        n_images=len(images),
        mean_ref_len=ref_len / n,
        mean_gt_len=gt_len / n,
        mean_edit_distance=dist / n,
        vocab_size=len(vocab),
    )
