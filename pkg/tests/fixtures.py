"""Hand-walked synthetic corpora shared by the builder and CLI tests.

The COCO-EE-style fixture is small enough to trace by hand: three images
with two ground-truth candidates each, plus a pool of seven extra
captions. Which candidates survive the cascade (and why) is worked out
in comments next to the data so the expected outputs are independent of
the implementation.
"""

from __future__ import annotations

from capedit.builder import Caption, FilterConfig, ScoreTable

# Ground-truth candidates, two per image.
GT_CAPTIONS = [
    Caption("i1", "101", "a man rides a red bicycle down the street.", True, "train"),
    Caption("i1", "102", "a man walks his bicycle down the road.", True, "train"),
    Caption("i2", "201", "two dogs play with a ball in the park.", True, "train"),
    Caption("i2", "202", "a dog chases a ball across the grass.", True, "train"),
    Caption("i3", "301", "a plate of pasta sits on the table.", True, "train"),
    Caption("i3", "302", "a bowl of soup rests on a wooden table.", True, "train"),
]

# Pool captions. Per-candidate outcome (worked by hand):
#   401 one-word swap of 101 ("red"->"blue"): BLEU-2 sqrt(.9*7/9)=.837,
#       BLEU-3 (.9*7/9*5/8)^(1/3)=.759 vs 101 -> passes the overlap gate;
#       min SPICE .30 < .35 -> kept; distances 2 (101) vs 7 (102) -> gt 101.
#   402 identical to 101: passes every gate, pairs with 101 at distance 0,
#       dropped as a zero-edit pair.
#   403 one-word swap of 201: same gate numbers as 401; min SPICE .34 -> kept.
#   404 one-word swap of 201: passes overlap, min SPICE exactly .35 -> the
#       strict < rejects it.
#   405 shares no bigram with any candidate: fails the overlap gate for
#       every image, so its SPICE scores are never looked up (none exist).
#   406 inserts "small" into 301: BLEU-2 .837 / BLEU-3 .759 -> kept,
#       SPICE .10; distances 1 (301) vs 10 (302) -> gt 301.
#   407 swaps "the"->"a" in 301: BLEU-2 sqrt(8/9*6/8)=.816, BLEU-3
#       (8/9*6/8*4/7)^(1/3)=.725 -> kept, SPICE .33; distances 2 vs 7 -> 301.
POOL_CAPTIONS = [
    Caption("p", "401", "a man rides a blue bicycle down the street.", False, "train"),
    Caption("p", "402", "a man rides a red bicycle down the street.", False, "train"),
    Caption("p", "403", "two dogs play with a frisbee in the park.", False, "train"),
    Caption("p", "404", "two dogs play with a stick in the park.", False, "train"),
    Caption("p", "405", "quantum flux readings spike near the old reactor core.", False, "train"),
    Caption("p", "406", "a plate of pasta sits on the small table.", False, "train"),
    Caption("p", "407", "a plate of pasta sits on a table.", False, "train"),
]

ALL_CAPTIONS = GT_CAPTIONS + POOL_CAPTIONS

SPICE_ENTRIES = {
    ("401", "101"): 0.30,
    ("401", "102"): 0.50,
    ("402", "101"): 0.20,
    ("402", "102"): 0.50,
    ("403", "201"): 0.34,
    ("403", "202"): 0.60,
    ("404", "201"): 0.35,
    ("404", "202"): 0.60,
    ("406", "301"): 0.10,
    ("406", "302"): 0.40,
    ("407", "301"): 0.33,
    ("407", "302"): 0.50,
}

# (image_id, ref text, gt text, split) after tokenize/detokenize.
EXPECTED_INSTANCES = {
    (
        "i1",
        "a man rides a blue bicycle down the street .",
        "a man rides a red bicycle down the street .",
        "train",
    ),
    (
        "i2",
        "two dogs play with a frisbee in the park .",
        "two dogs play with a ball in the park .",
        "train",
    ),
    (
        "i3",
        "a plate of pasta sits on the small table .",
        "a plate of pasta sits on the table .",
        "train",
    ),
    (
        "i3",
        "a plate of pasta sits on a table .",
        "a plate of pasta sits on the table .",
        "train",
    ),
}

FIXTURE_CONFIG = FilterConfig(topk_similar=12, sample_k=12, rng_seed=0)


def image_score_entries() -> dict[tuple[str, str], float]:
    """Similarity for every (image, pool caption) pair the build can touch."""
    gt_ids = {"i1": {"101", "102"}, "i2": {"201", "202"}, "i3": {"301", "302"}}
    wanted = {"i1": {"401", "402"}, "i2": {"403", "404"}, "i3": {"406", "407"}}
    scores: dict[tuple[str, str], float] = {}
    for image_id, own in gt_ids.items():
        for cap in ALL_CAPTIONS:
            if cap.caption_id in own:
                continue
            high = cap.caption_id in wanted[image_id]
            scores[(image_id, cap.caption_id)] = 0.9 if high else 0.1
    return scores


def make_score_tables() -> tuple[ScoreTable, ScoreTable]:
    return (
        ScoreTable("image_caption_similarity", image_score_entries()),
        ScoreTable("caption_spice", dict(SPICE_ENTRIES)),
    )


def write_cocoee_files(tmpdir) -> dict[str, str]:
    """Materialize the fixture as the three JSONL files the CLI ingests."""
    import json
    import os

    paths = {
        "captions": os.path.join(tmpdir, "captions.jsonl"),
        "scores": os.path.join(tmpdir, "image_scores.jsonl"),
        "spice": os.path.join(tmpdir, "spice_scores.jsonl"),
    }
    with open(paths["captions"], "w") as fh:
        for cap in ALL_CAPTIONS:
            fh.write(
                json.dumps(
                    {
                        "image_id": cap.image_id,
                        "caption_id": cap.caption_id,
                        "text": cap.text,
                        "is_gt": cap.is_gt,
                        "split": cap.split,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(paths["scores"], "w") as fh:
        for (a, b), s in sorted(image_score_entries().items()):
            fh.write(json.dumps({"a": a, "b": b, "score": s}, sort_keys=True) + "\n")
    with open(paths["spice"], "w") as fh:
        for (a, b), s in sorted(SPICE_ENTRIES.items()):
            fh.write(json.dumps({"a": a, "b": b, "score": s}, sort_keys=True) + "\n")
    return paths


FLICKR_RECORDS = [
    # complete group: contradiction + entailment (+ ignored neutral)
    {
        "image_id": "f1",
        "premise_id": "prem1",
        "label": "contradiction",
        "sentence": "a man sleeps on the couch.",
        "split": "train",
    },
    {
        "image_id": "f1",
        "premise_id": "prem1",
        "label": "neutral",
        "sentence": "a man might be tired.",
        "split": "train",
    },
    {
        "image_id": "f1",
        "premise_id": "prem1",
        "label": "entailment",
        "sentence": "a man rests indoors.",
        "split": "train",
    },
    # entailment only: no pair
    {
        "image_id": "f1",
        "premise_id": "prem2",
        "label": "entailment",
        "sentence": "someone is outside.",
        "split": "train",
    },
    # identical sentences: degenerate, dropped
    {
        "image_id": "f2",
        "premise_id": "prem1",
        "label": "contradiction",
        "sentence": "the same words here.",
        "split": "train",
    },
    {
        "image_id": "f2",
        "premise_id": "prem1",
        "label": "entailment",
        "sentence": "the same words here.",
        "split": "train",
    },
    # two contradictions: the first one wins
    {
        "image_id": "f2",
        "premise_id": "prem2",
        "label": "contradiction",
        "sentence": "nobody is swimming today.",
        "split": "val",
    },
    {
        "image_id": "f2",
        "premise_id": "prem2",
        "label": "contradiction",
        "sentence": "the pool is empty.",
        "split": "val",
    },
    {
        "image_id": "f2",
        "premise_id": "prem2",
        "label": "entailment",
        "sentence": "people swim in a pool.",
        "split": "val",
    },
    # neutral only: no pair
    {
        "image_id": "f3",
        "premise_id": "prem1",
        "label": "neutral",
        "sentence": "the weather could be warm.",
        "split": "train",
    },
]

EXPECTED_FLICKR = {
    ("f1", "a man sleeps on the couch .", "a man rests indoors .", "train"),
    ("f2", "nobody is swimming today .", "people swim in a pool .", "val"),
}
