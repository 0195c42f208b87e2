"""``ptseq`` command line.

Errors are reported on stderr as one line, ``ptseq-error: <code>: <message>``,
with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bench import benchmark_run
from .dataio import SymbolData, dump_json, format_feature_csv, read_sequence
from .dsp import Signal, extract_cepstral_features
from .errors import ArgumentError, PtseqError
from .fusion import FusionConfig, ModeDecision, fuse
from .pipeline import PipelineConfig, load_bundle, pipeline_classify, pipeline_train, save_bundle

log = logging.getLogger("ptseq")

EXIT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line usage errors
        raise ArgumentError(message.replace("\n", " "))


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="pipeline config (JSON)")
    p.add_argument("--algebra", choices=["minmax", "paper"], help="PTBHMM conjunction")
    p.add_argument("--seed", type=_seed, help="random seed (unsigned 64-bit)")
    p.add_argument("--output", type=Path, help="write the result here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptseq", description="Sequence classification with HMM and possibilistic HMM models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train one model per class from DATASET/<class>/*.csv|*.wav")
    p.add_argument("dataset", type=Path)
    p.add_argument("--family", choices=["hmm", "pthmm"])
    p.add_argument("--states", type=int, help="states per model (N)")
    p.add_argument("--symbols", type=int, help="codebook size / alphabet size (M)")
    _common(p)

    p = sub.add_parser("classify", help="rank the classes of a bundle for one sequence")
    p.add_argument("bundle", type=Path)
    p.add_argument("sequence", type=Path)
    p.add_argument("--fuse", type=Path, metavar="BUNDLE2", help="second-mode bundle to fuse with")
    p.add_argument("--fuse-input", type=Path, metavar="FILE2", help="second-mode input (defaults to SEQUENCE)")
    _common(p)

    p = sub.add_parser("features", help="cepstral features of a WAV file, written as CSV")
    p.add_argument("input", type=Path)
    _common(p)

    p = sub.add_parser("bench", help="time HMM vs PTBHMM forward passes")
    p.add_argument("--sizes", default="8,16,32,64,128", help="comma-separated state counts")
    p.add_argument("--length", type=int, default=2000, help="sequence length T")
    p.add_argument("--trials", type=int, default=3)
    _common(p)

    p = sub.add_parser("fuse", help="fuse two (label, likelihood) decisions")
    p.add_argument("label1")
    p.add_argument("alpha1", type=float)
    p.add_argument("label2")
    p.add_argument("alpha2", type=float)
    p.add_argument("--theta1", type=float)
    p.add_argument("--theta2", type=float)
    p.add_argument("--w1", type=float)
    p.add_argument("--w2", type=float)
    _common(p)
    return parser


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    over = {}
    if args.algebra:
        over["algebra"] = args.algebra
    if args.seed is not None:
        over["seed"] = args.seed
    for attr, key in (("family", "family"), ("states", "num_states"), ("symbols", "num_symbols")):
        value = getattr(args, attr, None)
        if value is not None:
            over[key] = value
    return replace(cfg, **over) if over else cfg


def _emit(text: str, output: Path | None) -> None:
    if output:
        output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_train(args) -> None:
    cfg = _config(args)
    bundle = pipeline_train(cfg, args.dataset)
    out = args.output or Path("bundle.json")
    save_bundle(bundle, out)
    print(f"trained {len(bundle.labels)} {cfg.family} models -> {out}")


def cmd_classify(args) -> None:
    bundle = load_bundle(args.bundle)
    if args.algebra:
        bundle = replace(bundle, models=tuple(
            m.with_algebra(args.algebra) if hasattr(m, "with_algebra") else m for m in bundle.models
        ))
    other = load_bundle(args.fuse) if args.fuse else None
    if args.config and other is not None:
        bundle = replace(bundle, config=replace(bundle.config, fusion=PipelineConfig.load(args.config).fusion))
    res = pipeline_classify(bundle, args.sequence, other, args.fuse_input)
    if args.output:
        doc = {"ranking": [[label, score] for label, score in res.ranking]}
        if res.fused:
            doc["fused"] = {"label": res.fused[0], "branch": res.fused[1],
                            "alpha1": res.decisions[0].likelihood, "alpha2": res.decisions[1].likelihood}
        dump_json(doc, args.output)
        return
    lines = [f"{rank}\t{label}\t{score!r}" for rank, (label, score) in enumerate(res.ranking, 1)]
    if res.fused:
        d1, d2 = res.decisions
        lines.append(f"fused\t{res.fused[0]}\tbranch={res.fused[1]}\talpha1={d1.likelihood!r}\talpha2={d2.likelihood!r}")
    print("\n".join(lines))


def cmd_features(args) -> None:
    cfg = _config(args)
    seq = read_sequence(args.input)
    if isinstance(seq, SymbolData):
        raise ArgumentError("features expects audio or feature input, got symbols")
    feats = extract_cepstral_features(seq, cfg.cepstral) if isinstance(seq, Signal) else seq
    _emit(format_feature_csv(feats), args.output)


def cmd_bench(args) -> None:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise ArgumentError(f"bad --sizes {args.sizes!r}") from None
    seed = args.seed if args.seed is not None else 0
    report = benchmark_run(sizes, args.length, args.trials, seed)
    _emit(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n", args.output)


def cmd_fuse(args) -> None:
    base = PipelineConfig.load(args.config).fusion if args.config else FusionConfig()
    over = {k: getattr(args, k) for k in ("theta1", "theta2", "w1", "w2") if getattr(args, k) is not None}
    cfg = replace(base, **over)
    label, branch = fuse(ModeDecision(args.label1, args.alpha1), ModeDecision(args.label2, args.alpha2), cfg)
    _emit(f"{label}\tbranch={branch}\n", args.output)


COMMANDS = {
    "train": cmd_train,
    "classify": cmd_classify,
    "features": cmd_features,
    "bench": cmd_bench,
    "fuse": cmd_fuse,
}


def _setup_logging() -> None:
    level = os.environ.get("PTSEQ_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except PtseqError as exc:
        print(f"ptseq-error: {exc.code}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"ptseq-error: io: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
