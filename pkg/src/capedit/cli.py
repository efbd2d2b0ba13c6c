"""Command-line surface: batch workflows over JSONL files.

Record-level failures never reach the main output: rows stream to a temp
file that is renamed onto the output path only when the run is clean;
otherwise the partial rows move to <output>.partial, diagnostics go to
<output>.errors, and the exit status is 1. Hard failures (unreadable
input, a missing score-table entry) exit 2. A sidecar <output>.meta.json
echoes the effective configuration of successful runs. Relative paths are
resolved against $CAPEDIT_DATA_ROOT when it is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Iterator, Optional

from . import __version__, builder, jsonl, kernels, metrics
from .builder import SPLITS, Caption, ECEInstance, FilterConfig, ScoreTable
from .editscript import detokenize, min_edit_script, tokenize
from .engine import (
    ExpansionConfig,
    KeepAllPolicy,
    OraclePolicy,
    RoundTrace,
    TracePolicy,
    expand_instance,
    run_rounds,
)
from .errors import CapEditError, PolicyContractError, RecordError

_INSTANCE_FIELDS = {"image_id": str, "ref": str, "gt": str, "split": str}
_EVAL_FIELDS = {"id": str, "ref": str, "out": str, "gt": str}
_CAPTION_FIELDS = {"image_id": str, "caption_id": str, "text": str, "is_gt": bool, "split": str}
_SCORE_FIELDS = {"a": str, "b": str, "score": (int, float)}
_HYPOTHESIS_FIELDS = {"image_id": str, "premise_id": str, "label": str, "sentence": str, "split": str}


def _resolve(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    root = os.environ.get("CAPEDIT_DATA_ROOT")
    if root and not os.path.isabs(path):
        return os.path.join(root, path)
    return path


class _Sink:
    """JSONL output with quarantine semantics (see module docstring)."""

    def __init__(self, out_path: str):
        self.out_path = out_path
        self.tmp_path = out_path + ".tmp"
        self._fh = open(self.tmp_path, "w", encoding="utf-8")
        self.n = 0
        self.errors: list[RecordError] = []

    def write(self, obj: dict) -> None:
        self._fh.write(jsonl.dump_line(obj) + "\n")
        self.n += 1

    def error(self, err: RecordError) -> None:
        self.errors.append(err)

    def finish(self, meta: dict) -> int:
        self._fh.close()
        if self.errors:
            os.replace(self.tmp_path, self.out_path + ".partial")
            with open(self.out_path + ".errors", "w", encoding="utf-8") as fh:
                for err in self.errors:
                    fh.write(
                        jsonl.dump_line(
                            {"path": err.path, "line": err.line, "error": err.message}
                        )
                        + "\n"
                    )
            for err in self.errors:
                print(f"error: {err}", file=sys.stderr)
            print(
                f"{len(self.errors)} record error(s); partial output at "
                f"{self.out_path}.partial",
                file=sys.stderr,
            )
            return 1
        os.replace(self.tmp_path, self.out_path)
        _write_meta(self.out_path, meta)
        return 0


def _write_meta(out_path: str, meta: dict) -> None:
    with open(out_path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _meta(command: str, **config) -> dict:
    return {
        "command": command,
        "version": __version__,
        "backend": kernels.backend(),
        "config": config,
    }


def _iter_lenient(path: str, sink: _Sink) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, record); malformed lines become sink errors."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                sink.error(RecordError(path, line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                sink.error(RecordError(path, line_no, "record is not a JSON object"))
                continue
            yield line_no, obj


def _parse_instance(path: str, line_no: int, obj: dict) -> tuple[str, list[str], list[str], dict]:
    jsonl.require_fields(path, line_no, obj, _INSTANCE_FIELDS)
    if obj["split"] not in SPLITS:
        raise RecordError(path, line_no, f"unknown split {obj['split']!r}")
    ref = tokenize(obj["ref"])
    gt = tokenize(obj["gt"])
    if not ref or not gt:
        raise RecordError(path, line_no, "empty caption")
    if ref == gt:
        raise RecordError(path, line_no, "identical ref and gt")
    return f"{obj['image_id']}#{line_no}", ref, gt, obj


def cmd_derive(args) -> int:
    in_path = _resolve(args.input)
    sink = _Sink(_resolve(args.output))
    total = 0
    steps_sum = 0
    for line_no, obj in _iter_lenient(in_path, sink):
        try:
            rec_id, ref, gt, obj = _parse_instance(in_path, line_no, obj)
        except RecordError as err:
            sink.error(err)
            continue
        script = min_edit_script(ref, gt)
        sink.write(
            {
                "id": rec_id,
                "image_id": obj["image_id"],
                "split": obj["split"],
                "ref": detokenize(ref),
                "gt": detokenize(gt),
                "ops": script.to_json(),
                "steps": script.steps,
            }
        )
        total += 1
        steps_sum += script.steps
    mean = steps_sum / total if total else 0.0
    print(f"derived {total} edit scripts, mean edit distance {mean:.2f}")
    return sink.finish(_meta("derive", input=args.input, output=args.output))


def cmd_edit(args) -> int:
    in_path = _resolve(args.input)
    sink = _Sink(_resolve(args.output))
    config = ExpansionConfig(max_rounds=args.max_rounds)
    traces: dict[str, dict] = {}
    if args.policy == "external-trace":
        if not args.traces:
            raise CapEditError("--policy external-trace requires --traces")
        traces_path = _resolve(args.traces)
        for line_no, obj in jsonl.iter_jsonl(traces_path):
            jsonl.require_fields(traces_path, line_no, obj, {"id": str, "trace": dict})
            traces[obj["id"]] = obj["trace"]
    keep_all = KeepAllPolicy()
    total = 0
    es_sum = 0
    matches = 0
    for line_no, obj in _iter_lenient(in_path, sink):
        try:
            rec_id, ref, gt, obj = _parse_instance(in_path, line_no, obj)
            try:
                if args.policy == "oracle":
                    policy = OraclePolicy(ref, gt)
                elif args.policy == "keep_all":
                    policy = keep_all
                else:
                    if rec_id not in traces:
                        raise RecordError(in_path, line_no, f"no trace for instance {rec_id!r}")
                    policy = TracePolicy(RoundTrace.from_json(traces[rec_id], ref))
                out_tokens, trace = run_rounds(ref, policy, ctx=rec_id, config=config)
            except (PolicyContractError, KeyError, TypeError) as exc:
                raise RecordError(in_path, line_no, f"editing failed: {exc}") from None
        except RecordError as err:
            sink.error(err)
            continue
        sink.write(
            {
                "id": rec_id,
                "ref": detokenize(ref),
                "out": detokenize(out_tokens),
                "gt": detokenize(gt),
                "trace": trace.to_json(),
            }
        )
        total += 1
        es_sum += metrics.es_of_trace(trace).total
        matches += out_tokens == gt
    mean_es = es_sum / total if total else 0.0
    print(
        f"edited {total} instances with policy {args.policy}: "
        f"{matches} exact matches, mean ES {mean_es:.2f}"
    )
    return sink.finish(
        _meta("edit", input=args.input, output=args.output, policy=args.policy,
              max_rounds=args.max_rounds, traces=args.traces)
    )


def _validate_trace_obj(path: str, line_no: int, obj: dict, ref: list[str]) -> None:
    trace = obj.get("trace")
    if trace is None:
        return
    if not isinstance(trace, dict):
        raise RecordError(path, line_no, "trace must be an object")
    try:
        parsed = RoundTrace.from_json(trace, ref)
    except (KeyError, TypeError) as exc:
        raise RecordError(path, line_no, f"malformed trace: {exc}") from None
    if len(parsed.del_labels) != len(ref):
        raise RecordError(path, line_no, "trace delete labels do not match ref length")
    if any(l not in ("KEEP", "DELETE") for l in parsed.del_labels):
        raise RecordError(path, line_no, "trace delete labels must be KEEP/DELETE")
    for rec in parsed.rounds:
        if any(l not in ("KEEP", "ADD") for l in rec.add_slots):
            raise RecordError(path, line_no, "trace slot labels must be KEEP/ADD")
        if any(not isinstance(w, str) for w in rec.inserted):
            raise RecordError(path, line_no, "trace inserted words must be strings")


def cmd_eval(args) -> int:
    in_path = _resolve(args.input)
    report_path = _resolve(args.report)
    records: list[dict] = []
    errors: list[RecordError] = []

    class _ErrorsOnly:
        def error(self, err: RecordError) -> None:
            errors.append(err)

    for line_no, obj in _iter_lenient(in_path, _ErrorsOnly()):  # type: ignore[arg-type]
        try:
            jsonl.require_fields(in_path, line_no, obj, _EVAL_FIELDS)
            ref = tokenize(obj["ref"])
            _validate_trace_obj(in_path, line_no, obj, ref)
            if args.es == "trace" and obj.get("trace") is None:
                raise RecordError(in_path, line_no, "record has no trace (--es trace)")
        except RecordError as err:
            errors.append(err)
            continue
        records.append(obj)
    if errors:
        with open(report_path + ".errors", "w", encoding="utf-8") as fh:
            for err in errors:
                fh.write(
                    jsonl.dump_line({"path": err.path, "line": err.line, "error": err.message})
                    + "\n"
                )
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    if not records:
        raise CapEditError(f"no records in {in_path}")
    report = metrics.evaluate_records(records, es_mode=args.es)
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_meta(report_path, _meta("eval", input=args.input, report=args.report, es=args.es))
    table = metrics.format_report(report)
    if args.table:
        with open(_resolve(args.table), "w", encoding="utf-8") as fh:
            fh.write(table)
    print(table, end="")
    return 0


def _load_scores(path: str, kind: str) -> ScoreTable:
    table = ScoreTable(kind)
    for line_no, obj in jsonl.iter_jsonl(path):
        jsonl.require_fields(path, line_no, obj, _SCORE_FIELDS)
        table.put(obj["a"], obj["b"], obj["score"])
    return table


def cmd_build_cocoee(args) -> int:
    captions_path = _resolve(args.captions)
    sink = _Sink(_resolve(args.output))
    manifest: Optional[dict[str, str]] = None
    if args.split_manifest:
        manifest_path = _resolve(args.split_manifest)
        manifest = {}
        for line_no, obj in jsonl.iter_jsonl(manifest_path):
            jsonl.require_fields(manifest_path, line_no, obj, {"image_id": str, "split": str})
            if obj["split"] not in SPLITS:
                raise RecordError(manifest_path, line_no, f"unknown split {obj['split']!r}")
            manifest[obj["image_id"]] = obj["split"]
    captions: list[Caption] = []
    for line_no, obj in _iter_lenient(captions_path, sink):
        try:
            jsonl.require_fields(captions_path, line_no, obj, _CAPTION_FIELDS)
            split = obj["split"]
            if manifest is not None:
                if obj["image_id"] not in manifest:
                    raise RecordError(
                        captions_path, line_no, f"image {obj['image_id']!r} not in split manifest"
                    )
                split = manifest[obj["image_id"]]
            if split not in SPLITS:
                raise RecordError(captions_path, line_no, f"unknown split {split!r}")
        except RecordError as err:
            sink.error(err)
            continue
        if split != args.split:
            continue
        captions.append(
            Caption(obj["image_id"], obj["caption_id"], obj["text"], obj["is_gt"], split)
        )
    cfg = FilterConfig(
        topk_similar=args.topk,
        sample_k=args.sample_k,
        bleu2_min=args.bleu2_min,
        bleu3_min=args.bleu3_min,
        spice_max=args.spice_max,
        rng_seed=args.seed,
    )
    image_scores = _load_scores(_resolve(args.scores), "image_caption_similarity")
    spice_scores = _load_scores(_resolve(args.spice), "caption_spice")
    instances = builder.build_cocoee_split(captions, image_scores, spice_scores, cfg, jobs=args.jobs)
    for inst in instances:
        sink.write(inst.to_json())
    n_images = len({i.image_id for i in instances})
    print(f"built {len(instances)} instances over {n_images} images (split {args.split})")
    return sink.finish(
        _meta(
            "build-cocoee",
            captions=args.captions,
            scores=args.scores,
            spice=args.spice,
            split=args.split,
            split_manifest=args.split_manifest,
            seed=args.seed,
            topk=args.topk,
            sample_k=args.sample_k,
            bleu2_min=args.bleu2_min,
            bleu3_min=args.bleu3_min,
            spice_max=args.spice_max,
            output=args.output,
        )
    )


def cmd_build_flickr(args) -> int:
    in_path = _resolve(args.hypotheses)
    sink = _Sink(_resolve(args.output))
    records: list[dict] = []
    for line_no, obj in _iter_lenient(in_path, sink):
        try:
            jsonl.require_fields(in_path, line_no, obj, _HYPOTHESIS_FIELDS)
            if obj["label"] not in builder.HYPOTHESIS_LABELS:
                raise RecordError(in_path, line_no, f"unknown label {obj['label']!r}")
            if obj["split"] not in SPLITS:
                raise RecordError(in_path, line_no, f"unknown split {obj['split']!r}")
        except RecordError as err:
            sink.error(err)
            continue
        records.append(obj)
    instances = builder.build_flickr30kee(records)
    if args.split:
        instances = [i for i in instances if i.split == args.split]
    for inst in instances:
        sink.write(inst.to_json())
    print(f"built {len(instances)} instances from {len(records)} hypotheses")
    return sink.finish(
        _meta("build-flickr30kee", hypotheses=args.hypotheses, split=args.split, output=args.output)
    )


def cmd_stats(args) -> int:
    in_path = _resolve(args.input)
    by_split: dict[str, list[ECEInstance]] = {}
    errors: list[RecordError] = []

    class _ErrorsOnly:
        def error(self, err: RecordError) -> None:
            errors.append(err)

    for line_no, obj in _iter_lenient(in_path, _ErrorsOnly()):  # type: ignore[arg-type]
        try:
            _, ref, gt, obj = _parse_instance(in_path, line_no, obj)
        except RecordError as err:
            errors.append(err)
            continue
        inst = ECEInstance(obj["image_id"], tuple(ref), tuple(gt), obj["split"])
        by_split.setdefault(inst.split, []).append(inst)
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    if not by_split:
        raise CapEditError(f"no instances in {in_path}")
    stats = {split: builder.compute_stats(insts) for split, insts in sorted(by_split.items())}
    header = f"{'split':<6} {'instances':>9} {'images':>7} {'ref_len':>8} {'gt_len':>8} {'edit_dist':>9} {'vocab':>7}"
    print(header)
    for split, st in stats.items():
        print(
            f"{split:<6} {st.n_instances:>9} {st.n_images:>7} "
            f"{st.mean_ref_len:>8.2f} {st.mean_gt_len:>8.2f} "
            f"{st.mean_edit_distance:>9.2f} {st.vocab_size:>7}"
        )
    if args.output:
        out_path = _resolve(args.output)
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump({s: st.to_json() for s, st in stats.items()}, fh, sort_keys=True, indent=2)
            fh.write("\n")
        _write_meta(out_path, _meta("stats", input=args.input, output=args.output))
    return 0


def cmd_expand(args) -> int:
    in_path = _resolve(args.input)
    sink = _Sink(_resolve(args.output))
    config = ExpansionConfig(keep_weight=args.lam, max_rounds=args.max_rounds)
    n_instances = 0
    n_samples = 0
    for line_no, obj in _iter_lenient(in_path, sink):
        try:
            rec_id, ref, gt, obj = _parse_instance(in_path, line_no, obj)
        except RecordError as err:
            sink.error(err)
            continue
        for sample in expand_instance(ref, gt, config):
            sink.write({"id": rec_id, **sample.to_json()})
            n_samples += 1
        n_instances += 1
    print(f"expanded {n_instances} instances into {n_samples} training samples")
    return sink.finish(
        _meta(
            "expand",
            input=args.input,
            output=args.output,
            **{"lambda": args.lam, "max_rounds": args.max_rounds},
        )
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capedit",
        description="Explicit caption editing: scripts, round-based editing, metrics, datasets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="derive minimal edit scripts for instance pairs")
    p.add_argument("-i", "--input", required=True, help="instances JSONL")
    p.add_argument("-o", "--output", required=True, help="scripts JSONL")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("edit", help="run the round-based editor over instances")
    p.add_argument("-i", "--input", required=True, help="instances JSONL")
    p.add_argument("-o", "--output", required=True, help="outputs JSONL (eval schema)")
    p.add_argument(
        "--policy",
        choices=("oracle", "keep_all", "external-trace"),
        default="oracle",
        help="decision source (default oracle)",
    )
    p.add_argument("--max-rounds", type=int, default=4, help="add-round budget (default 4)")
    p.add_argument("--traces", help="trace JSONL {id, trace} for --policy external-trace")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("eval", help="score outputs against ground truth")
    p.add_argument("-i", "--input", required=True, help="outputs JSONL")
    p.add_argument("--report", required=True, help="metric report JSON path")
    p.add_argument("--table", help="also write the text table here")
    p.add_argument(
        "--es",
        choices=("auto", "trace", "implicit"),
        default="auto",
        help="editing-steps source (default auto: trace when present)",
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("build-cocoee", help="run the COCO-EE filter cascade")
    p.add_argument("--captions", required=True, help="captions JSONL")
    p.add_argument("--scores", required=True, help="image-caption similarity JSONL")
    p.add_argument("--spice", required=True, help="caption-caption SPICE JSONL")
    p.add_argument("--split", required=True, choices=SPLITS)
    p.add_argument("--split-manifest", help="image_id->split JSONL overriding caption splits")
    p.add_argument("--seed", type=int, default=0, help="candidate sampling seed")
    p.add_argument("--topk", type=int, default=300, help="similarity pre-filter size")
    p.add_argument("--sample-k", type=int, default=30, help="candidates sampled per image")
    p.add_argument("--bleu2-min", type=float, default=0.4)
    p.add_argument("--bleu3-min", type=float, default=0.3)
    p.add_argument("--spice-max", type=float, default=0.35)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("-o", "--output", required=True, help="instances JSONL")
    p.set_defaults(func=cmd_build_cocoee)

    p = sub.add_parser("build-flickr30kee", help="pair contradiction/entailment hypotheses")
    p.add_argument("--hypotheses", required=True, help="hypotheses JSONL")
    p.add_argument("--split", choices=SPLITS, help="keep only this split")
    p.add_argument("-o", "--output", required=True, help="instances JSONL")
    p.set_defaults(func=cmd_build_flickr)

    p = sub.add_parser("stats", help="summarize an instances file per split")
    p.add_argument("-i", "--input", required=True, help="instances JSONL")
    p.add_argument("-o", "--output", help="stats JSON path (table always printed)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("expand", help="expand instances into per-round training samples")
    p.add_argument("-i", "--input", required=True, help="instances JSONL")
    p.add_argument("-o", "--output", required=True, help="samples JSONL")
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=1.5,
        help="KEEP label weight (default 1.5)",
    )
    p.add_argument("--max-rounds", type=int, default=4)
    p.set_defaults(func=cmd_expand)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapEditError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
