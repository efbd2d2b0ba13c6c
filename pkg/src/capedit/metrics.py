"""Caption quality metrics and editing-effort accounting.

Quality metrics follow the standard single-reference captioning
conventions: corpus-level BLEU-n with brevity penalty and no smoothing,
ROUGE-L as the mean per-instance LCS F-measure with beta=1.2, and CIDEr-D
as tf-idf n-gram cosine similarity (n=1..4) with count clipping, a
sigma=6 length gaussian, and the x10 per-n scaling. BLEU and ROUGE-L
return values in [0,1]; CIDEr-D returns the x100 reported scale (0..1000).

Editing effort counts non-KEEP operations: deletions from the delete pass
plus every inserted word; KEEP is free. GPS is the corpus-level CIDEr-D
gain over the reference captions per mean editing step.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from . import kernels
from .editscript import DELETE, tokenize
from .engine import RoundTrace
from .errors import ZeroEditStepsError

TokenSeq = Sequence[str]


def _ngram_counts(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_corpus(cands: Sequence[TokenSeq], refs: Sequence[TokenSeq]) -> None:
    if len(cands) != len(refs):
        raise ValueError(f"{len(cands)} candidates vs {len(refs)} references")
    if not cands:
        raise ValueError("empty evaluation corpus")


def bleu_all(cands: Sequence[TokenSeq], refs: Sequence[TokenSeq], max_n: int = 4) -> tuple[float, ...]:
    """Corpus BLEU-1..max_n, one value per n, no smoothing."""
    _check_corpus(cands, refs)
    correct = [0] * max_n
    guess = [0] * max_n
    testlen = 0
    reflen = 0
    for c, r in zip(cands, refs):
        testlen += len(c)
        reflen += len(r)
        for n in range(1, max_n + 1):
            if len(c) < n:
                break
            cc = _ngram_counts(c, n)
            rc = _ngram_counts(r, n)
            guess[n - 1] += len(c) - n + 1
            correct[n - 1] += sum(min(cnt, rc[g]) for g, cnt in cc.items())
    if testlen == 0:
        return (0.0,) * max_n
    bp = 1.0 if testlen >= reflen else math.exp(1.0 - reflen / testlen)
    out = []
    for n in range(1, max_n + 1):
        precisions = [correct[k] / guess[k] if guess[k] > 0 else 0.0 for k in range(n)]
        if min(precisions) == 0.0:
            out.append(0.0)
        else:
            out.append(bp * math.exp(sum(math.log(p) for p in precisions) / n))
    return tuple(out)


def bleu(cands: Sequence[TokenSeq], refs: Sequence[TokenSeq], n: int = 4) -> float:
    """Corpus BLEU-n in [0,1]; single reference per candidate."""
    if not 1 <= n:
        raise ValueError(f"n must be >= 1, got {n}")
    return bleu_all(cands, refs, n)[n - 1]


def rouge_l(cands: Sequence[TokenSeq], refs: Sequence[TokenSeq], beta: float = 1.2) -> float:
    """Mean per-instance LCS F-measure in [0,1]."""
    _check_corpus(cands, refs)
    total = 0.0
    for c, r in zip(cands, refs):
        if not c or not r:
            continue
        l = kernels.lcs_tokens(c, r)
        if l == 0:
            continue
        prec = l / len(c)
        rec = l / len(r)
        total += (1 + beta**2) * prec * rec / (rec + beta**2 * prec)
    return total / len(cands)


def cider_d(
    cands: Sequence[TokenSeq],
    refs: Sequence[TokenSeq],
    idf_corpus: Optional[Sequence[TokenSeq]] = None,
    max_n: int = 4,
    sigma: float = 6.0,
) -> float:
    """Corpus CIDEr-D on the x100 reported scale (self-match -> 1000).

    idf_corpus is the document set for IDF, one caption per document;
    defaults to refs (the evaluation set's ground-truth captions).
    """
    _check_corpus(cands, refs)
    docs = list(refs) if idf_corpus is None else list(idf_corpus)
    if not docs:
        raise ValueError("empty idf corpus")
    df: list[Counter] = [Counter() for _ in range(max_n)]
    for doc in docs:
        for n in range(1, max_n + 1):
            for g in set(_ngram_counts(doc, n)):
                df[n - 1][g] += 1
    log_docs = math.log(len(docs))

    def tfidf_vec(tokens: TokenSeq, n: int) -> tuple[dict, float]:
        vec = {}
        for g, cnt in _ngram_counts(tokens, n).items():
            idf = log_docs - math.log(max(1.0, df[n - 1][g]))
            vec[g] = cnt * idf
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return vec, norm

    total = 0.0
    for c, r in zip(cands, refs):
        delta = len(c) - len(r)
        penalty = math.exp(-(delta**2) / (2.0 * sigma**2))
        inst = 0.0
        for n in range(1, max_n + 1):
            vc, nc = tfidf_vec(c, n)
            vr, nr = tfidf_vec(r, n)
            if nc == 0.0 or nr == 0.0:
                continue
            num = sum(min(v, vr[g]) * vr[g] for g, v in vc.items() if g in vr)
            inst += num / (nc * nr) * penalty
        total += 10.0 * inst / max_n
    return total / len(cands) * 100.0


class EditingSteps(NamedTuple):
    deletes: int
    adds: int
    total: int


def es_of_trace(trace: RoundTrace) -> EditingSteps:
    """Deletion, addition, and total editing steps of one trace."""
    deletes = sum(1 for l in trace.del_labels if l == DELETE)
    adds = sum(len(r.inserted) for r in trace.rounds)
    return EditingSteps(deletes, adds, deletes + adds)


def es_implicit(ref: TokenSeq, out: TokenSeq) -> int:
    """Editing steps charged to a model that rewrites from scratch:
    every reference token deleted, every output token added."""
    return len(ref) + len(out)


def gps(cider_ref: float, cider_out: float, mean_es: float) -> float:
    """CIDEr-D gain per mean editing step (corpus-level)."""
    if mean_es <= 0:
        raise ZeroEditStepsError(f"mean editing steps must be positive, got {mean_es}")
    return (cider_out - cider_ref) / mean_es


COMPOUND_KINDS = ("KEEP_N", "DELETE_N", "PHRASE_KEEP", "PHRASE_DELETE", "REPLACE", "REORDER")


@dataclass(frozen=True)
class CompoundOp:
    """A multi-effect edit op from compound formulations.

    payload: word count for KEEP_N/DELETE_N, the phrase for PHRASE_*,
    absent for REPLACE/REORDER.
    """

    kind: str
    payload: int | str | None = None

    def __post_init__(self):
        if self.kind not in COMPOUND_KINDS:
            raise ValueError(f"unknown compound kind {self.kind!r}")
        if self.kind in ("KEEP_N", "DELETE_N"):
            if not isinstance(self.payload, int) or self.payload < 0:
                raise ValueError(f"{self.kind} needs a non-negative count")
        elif self.kind in ("PHRASE_KEEP", "PHRASE_DELETE"):
            if not isinstance(self.payload, str) or not self.payload.split():
                raise ValueError(f"{self.kind} needs a non-empty phrase")
        elif self.payload is not None:
            raise ValueError(f"{self.kind} carries no payload")


def decompose_compound(op: CompoundOp) -> tuple[int, int, int]:
    """(delete, add, reorder) base-step counts of one compound op.

    A compound delete re-anchors its span: one DELETE plus one ADD per
    word; a compound keep costs one ADD per word; REPLACE is one DELETE
    plus one ADD; a reorder counts as a single step.
    """
    if op.kind == "KEEP_N":
        return (0, op.payload, 0)  # type: ignore[return-value]
    if op.kind == "DELETE_N":
        return (1, op.payload, 0)  # type: ignore[return-value]
    if op.kind == "PHRASE_KEEP":
        return (0, len(op.payload.split()), 0)  # type: ignore[union-attr]
    if op.kind == "PHRASE_DELETE":
        return (1, len(op.payload.split()), 0)  # type: ignore[union-attr]
    if op.kind == "REPLACE":
        return (1, 1, 0)
    return (0, 0, 1)


@dataclass(frozen=True)
class MetricReport:
    """Corpus evaluation summary.

    bleu values are in [0,1]; rouge_l, cider_d, cider_d_ref, and spice are
    on the x100 reported scale. es == del_steps + add_steps. gps_c is None
    when the corpus performed no edits.
    """

    n_instances: int
    bleu: tuple[float, float, float, float]
    rouge_l: float
    cider_d: float
    cider_d_ref: float
    es: float
    del_steps: float
    add_steps: float
    gps_c: Optional[float]
    spice: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "bleu": list(self.bleu),
            "rouge_l": self.rouge_l,
            "cider_d": self.cider_d,
            "cider_d_ref": self.cider_d_ref,
            "es": self.es,
            "del_steps": self.del_steps,
            "add_steps": self.add_steps,
            "gps_c": self.gps_c,
            "spice": self.spice,
        }


def evaluate_records(records: Sequence[dict], es_mode: str = "auto") -> MetricReport:
    """Score eval records {"id","ref","out","gt","trace"?,"spice"?}.

    es_mode: "trace" requires a trace on every record, "implicit" charges
    every record the rewrite-from-scratch convention, "auto" uses the
    trace when present and the implicit convention otherwise.
    """
    if es_mode not in ("auto", "trace", "implicit"):
        raise ValueError(f"unknown es_mode {es_mode!r}")
    if not records:
        raise ValueError("empty evaluation set")
    refs = [tokenize(r["ref"]) for r in records]
    outs = [tokenize(r["out"]) for r in records]
    gts = [tokenize(r["gt"]) for r in records]
    bleu4 = bleu_all(outs, gts, 4)
    rl = rouge_l(outs, gts)
    c_out = cider_d(outs, gts, idf_corpus=gts)
    c_ref = cider_d(refs, gts, idf_corpus=gts)
    del_total = 0
    add_total = 0
    for rec, ref_toks, out_toks in zip(records, refs, outs):
        trace_obj = rec.get("trace")
        use_trace = es_mode == "trace" or (es_mode == "auto" and trace_obj is not None)
        if use_trace:
            if trace_obj is None:
                raise ValueError(f"record {rec.get('id')!r} has no trace")
            trace = RoundTrace.from_json(trace_obj, ref_toks)
            if len(trace.del_labels) != len(ref_toks):
                raise ValueError(f"record {rec.get('id')!r}: trace does not match ref length")
            d, a, _ = es_of_trace(trace)
        else:
            d, a = len(ref_toks), len(out_toks)
        del_total += d
        add_total += a
    n = len(records)
    mean_es = (del_total + add_total) / n
    gps_c = gps(c_ref, c_out, mean_es) if mean_es > 0 else None
    spice = None
    if all("spice" in r for r in records):
        spice = sum(float(r["spice"]) for r in records) / n * 100.0
    return MetricReport(
        n_instances=n,
        bleu=tuple(bleu4),  # type: ignore[arg-type]
        rouge_l=rl * 100.0,
        cider_d=c_out,
        cider_d_ref=c_ref,
        es=mean_es,
        del_steps=del_total / n,
        add_steps=add_total / n,
        gps_c=gps_c,
        spice=spice,
    )


def format_report(report: MetricReport) -> str:
    """Text table mirroring the standard column layout."""

    def f1(x: Optional[float]) -> str:
        return "-" if x is None else f"{x:.1f}"

    def f2(x: Optional[float]) -> str:
        return "-" if x is None else f"{x:.2f}"

    header = ["", "B-1", "B-2", "B-3", "B-4", "R", "C", "S", "ES", "GPS(C)", "D", "A"]
    ref_row = ["Ref-Caps", "-", "-", "-", "-", "-", f1(report.cider_d_ref), "-", "-", "-", "-", "-"]
    out_row = [
        "Output",
        *(f1(b * 100.0) for b in report.bleu),
        f1(report.rouge_l),
        f1(report.cider_d),
        f1(report.spice),
        f2(report.es),
        f2(report.gps_c),
        f2(report.del_steps),
        f2(report.add_steps),
    ]
    widths = [max(len(row[i]) for row in (header, ref_row, out_row)) for i in range(len(header))]
    lines = [f"{report.n_instances} instances"]
    for row in (header, ref_row, out_row):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
