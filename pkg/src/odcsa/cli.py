"""Command-line entry points: synth, train, eval, predict, gradcheck, flops, config."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import Config, ConfigError, load_config
from .data import NetpbmError, SynthConfig, load_dataset, read_image, save_dataset, synth_generate, write_pgm
from .gradsuite import BLOCKS, run_suite
from .inference import evaluate_model, evaluate_pred_dir, predict_prob
from .metrics import write_report_csv
from .nn import OdcSaNet, count_params_flops, load_model
from .nn.checkpoint import CheckpointError
from .train import train


def cmd_synth(args) -> int:
    ds = synth_generate(SynthConfig(count=args.n, size=args.size, seed=args.seed))
    out = Path(args.out)
    save_dataset(ds.samples, out)
    # rotated twins share ids with a suffix and live in their own dataset tree
    save_dataset(ds.rotated, out / "rotated")
    print(f"wrote {len(ds)} samples (+{len(ds.rotated)} rotated) to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)

    def progress(row):
        epoch, step, lr, _, _, total = row
        print(f"epoch {epoch} step {step} lr {lr:.1e} loss {total:.4f}")

    result = train(cfg, progress=None if args.quiet else progress)
    print(f"trained {len(result.rows)} steps; checkpoint {cfg.ckpt_path}; run log {cfg.log_path}")
    return 0


def cmd_eval(args) -> int:
    samples = load_dataset(args.data)
    if args.pred:
        report = evaluate_pred_dir(args.pred, samples)
    else:
        report = evaluate_model(load_model(args.ckpt), samples)
    name = args.name or Path(args.data).name
    write_report_csv({name: report}, args.report)
    print(",".join(report.csv_row(name)))
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.ckpt)
    write_pgm(predict_prob(model, read_image(args.image)), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_gradcheck(args) -> int:
    names = None if args.block == "all" else [args.block]
    results = run_suite(names, seed=args.seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_flops(args) -> int:
    model = load_model(args.ckpt) if args.ckpt else OdcSaNet(seed=0)
    for line in count_params_flops(model, args.size).lines():
        print(line)
    return 0


def cmd_config(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    sys.stdout.write(cfg.dump())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odcsa", description="Orthogonal-direction polyp segmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train from a key=value config")
    p.add_argument("--config", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint or a prediction directory")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ckpt")
    src.add_argument("--pred", help="directory of <id>.pgm probability maps")
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--name", help="dataset label in the report (default: data dir name)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="write a P5 probability map for one image")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--block", default="all", choices=[*BLOCKS, "all"])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("flops", help="parameter and MAC accounting")
    p.add_argument("--size", type=int, default=352)
    p.add_argument("--ckpt")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("config", help="configuration utilities")
    p.add_argument("action", choices=["dump"])
    p.add_argument("--config", help="parse this file instead of using defaults")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, ConfigError, NetpbmError, CheckpointError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"odcsa {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
