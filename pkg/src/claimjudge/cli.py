"""Command-line entry point.

Verbs: generate, train, eval, ablate, hops, gradcheck, serve. Every verb
accepts --config pointing at a JSON file mirroring TrainConfig; individual
flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import TrainConfig
from .data import load_cases, save_cases
from .synth import GeneratorProfile, synth_generate


def _load_config(args) -> TrainConfig:
    cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
    for name in ("seed", "epochs", "learning_rate", "batch_size", "hops"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "corpus", None):
        cfg.corpus_path = args.corpus
    for flag in ("no_role", "no_utterance_memory", "no_fact_memory", "no_self_attention", "single_task"):
        if getattr(args, flag, False):
            setattr(cfg.ablation, flag, True)
    cfg.__post_init__()
    return cfg


def _corpus(cfg: TrainConfig, args):
    path = getattr(args, "corpus", None) or cfg.corpus_path
    if not path:
        print("error: no corpus given (use --corpus or config corpus_path)", file=sys.stderr)
        raise SystemExit(2)
    return load_cases(path)


def _add_common(parser: argparse.ArgumentParser, train_flags: bool = True):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--corpus", help="JSON-lines corpus path")
    if train_flags:
        parser.add_argument("--seed", type=int)
        parser.add_argument("--epochs", type=int)
        parser.add_argument("--learning-rate", dest="learning_rate", type=float)
        parser.add_argument("--batch-size", dest="batch_size", type=int)
        parser.add_argument("--hops", type=int)
        for flag in ("no-role", "no-utterance-memory", "no-fact-memory", "no-self-attention", "single-task"):
            parser.add_argument(f"--{flag}", dest=flag.replace("-", "_"), action="store_true")


def _write_report(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"report written to {path}")


def cmd_generate(args) -> int:
    if args.profile:
        with open(args.profile) as fh:
            fields = json.load(fh)
        fields["claim_count_probs"] = tuple(fields.get("claim_count_probs", (0.25, 0.5, 0.25)))
        profile = GeneratorProfile(**fields)
    else:
        profile = GeneratorProfile()
    cases = synth_generate(args.seed if args.seed is not None else 0, args.n_cases, profile)
    save_cases(args.out, cases)
    n_claims = sum(len(c.claims) for c in cases)
    print(f"wrote {len(cases)} cases ({n_claims} claims) to {args.out}")
    return 0


def cmd_train(args) -> int:
    from .training import evaluate_params, split_cases, train

    cfg = _load_config(args)
    cases = _corpus(cfg, args)
    train_c, val_c, test_c = split_cases(cases, cfg.seed, cfg.val_fraction, cfg.test_fraction)
    result = train(cfg, train_c, val_cases=val_c, checkpoint_path=args.out, log=print)
    print(f"best epoch {result.best_epoch}  val micro F1 {result.best_val_micro_f1:.4f}")
    if test_c:
        report = evaluate_params(result.params, cfg, result.vocab, test_c)
        print(f"test micro F1 {report.micro_f1:.4f}  macro F1 {report.macro_f1:.4f}")
        _write_report(args.report, {"test": report.to_dict(),
                                    "history": [vars(r) for r in result.history]})
    return 0


def cmd_eval(args) -> int:
    from .training import evaluate

    cases = load_cases(args.corpus)
    report = evaluate(args.checkpoint, cases)
    print(f"cases {len(cases)}  micro F1 {report.micro_f1:.4f}  macro F1 {report.macro_f1:.4f}")
    print(f"macro P {report.macro_precision:.4f}  macro R {report.macro_recall:.4f}")
    print("confusion (rows = gold):")
    for row in report.confusion:
        print("   " + " ".join(f"{v:6d}" for v in row))
    if report.fact_micro_f1 is not None:
        print(f"fact micro F1 {report.fact_micro_f1:.4f}  fact macro F1 {report.fact_macro_f1:.4f}")
        for f in report.per_fact:
            print(f"   {f.label:22s} micro {f.micro_f1:.3f}  macro {f.macro_f1:.3f}")
    _write_report(args.report, report.to_dict())
    return 0


def cmd_ablate(args) -> int:
    from .training import run_ablations

    cfg = _load_config(args)
    cases = _corpus(cfg, args)
    seeds = tuple(int(s) for s in args.seeds.split(","))
    rows = run_ablations(cfg, cases, seeds=seeds, log=print)
    print(f"\n{'model':24s} {'Mic.F1':>8s} {'Mac.F1':>8s} {'RIE%':>8s}")
    for row in rows:
        print(f"{row.name:24s} {row.micro_f1:8.4f} {row.macro_f1:8.4f} {row.rie_percent:8.1f}")
    print("RIE = (F1_full - F1_ablated) / (1 - F1_full), macro F1, median over seeds")
    _write_report(args.report, {"rows": [vars(r) for r in rows], "seeds": list(seeds)})
    return 0


def cmd_hops(args) -> int:
    from .training import hop_sweep

    cfg = _load_config(args)
    cases = _corpus(cfg, args)
    hop_range = range(args.min_hops, args.max_hops + 1)
    rows = hop_sweep(cfg, cases, hop_range=hop_range, log=print)
    print(f"\n{'#Hops':>6s} {'Micro F1':>10s} {'Macro F1':>10s} {'params':>10s} {'seconds':>9s}")
    for row in rows:
        print(f"{row.hops:6d} {row.micro_f1:10.4f} {row.macro_f1:10.4f} {row.parameter_count:10d} {row.train_seconds:9.1f}")
    _write_report(args.report, {"rows": [vars(r) for r in rows]})
    return 0


def cmd_gradcheck(args) -> int:
    from .testing import composed_model_gradcheck, primitive_gradchecks

    worst_prims = primitive_gradchecks(seeds=args.seeds)
    failures = {name: err for name, err in worst_prims.items() if err >= 1e-4}
    for name, err in sorted(worst_prims.items()):
        print(f"primitive {name:18s} worst rel err {err:.3e}")
    worst_model = composed_model_gradcheck(seeds=args.model_seeds)
    print(f"composed model        worst rel err {worst_model:.3e}")
    if failures or worst_model >= 1e-4:
        print("GRADCHECK FAILED")
        return 1
    print("gradcheck passed (threshold 1e-4)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = args.ui_dir
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(args.checkpoint, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimjudge")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("generate", help="write a synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-cases", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", help="JSON file with GeneratorProfile fields")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("train", help="train and save a checkpoint")
    _add_common(p)
    p.add_argument("--out", help="checkpoint path (.npz)")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="full model vs component removals")
    _add_common(p)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("hops", help="sweep the memory hop count")
    _add_common(p)
    p.add_argument("--min-hops", type=int, default=1)
    p.add_argument("--max-hops", type=int, default=6)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_hops)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--seeds", type=int, default=100, help="seeds per primitive")
    p.add_argument("--model-seeds", type=int, default=100, help="seeds for the composed model")
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("serve", help="run the prediction service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", help="static directory for the review UI")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
