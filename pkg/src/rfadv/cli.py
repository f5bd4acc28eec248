"""Command-line pipeline: synth -> train -> eval -> attack -> sweep -> plot.

Every command is reproducible from its flags plus seed. Relative paths pick
up the RFADV_DATA_DIR environment variable when it is set, so scripted runs
can point all artifacts at one directory. Errors print a single line to
stderr and exit 1; malformed flags exit 2 via argparse.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .channel import ChannelModelParams, sample_channel
from .classifier import (ArchitectureSpec, TrainConfig, load_model, new_model,
                         save_model, train)
from .container import read_container, write_container
from .dataset import GenerationSpec, build_dataset, load_dataset, save_dataset
from .errors import ConfigurationError, RfadvError
from .harness import (ATTACK_KINDS, attack_params_from_dict,
                      load_sweep_config, make_crafting_set, pnr_to_budget,
                      sweep_from_config, write_sweep_csv)
from .harness import _UAP_KINDS, _UNIVERSAL_CACHED
from .modulation import ModulationType, PulseSpec
from .numerics import derive_rng
from .plot import plot_csv
from .universal import craft_uap_blackbox, craft_uap_limited

_PERT_FMT = "rfadv.perturbation"

# one name per line so argparse cannot wrap mid-name
_KIND_EPILOG = "attack kinds:\n" + "\n".join(f"  {k}" for k in ATTACK_KINDS)


def _resolve(path: str | None) -> str | None:
    """Relative paths land under RFADV_DATA_DIR when the variable is set."""
    if path is None:
        return None
    base = os.environ.get("RFADV_DATA_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _parse_snr(text: str) -> float:
    return math.inf if text.strip().lower() == "inf" else float(text)


def _parse_classes(text: str) -> tuple[ModulationType, ...]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    out = []
    for name in names:
        try:
            out.append(ModulationType(name))
        except ValueError:
            valid = ", ".join(m.value for m in ModulationType)
            raise ConfigurationError(f"unknown class {name!r}; valid: {valid}")
    return tuple(out)


def _parse_arch(text: str, p: int, classes, param_seed: int) -> ArchitectureSpec:
    """Compact layer spec, e.g. "c16x5,c8x3,d64": convs as cFILTERSxWIDTH in
    order, then dense widths; the class layer is implicit."""
    conv = []
    dense = []
    for tok in (t.strip() for t in text.split(",") if t.strip()):
        if tok.startswith("c") and "x" in tok:
            f_s, w_s = tok[1:].split("x", 1)
            conv.append((int(f_s), int(w_s)))
        elif tok.startswith("d"):
            dense.append(int(tok[1:]))
        else:
            raise ConfigurationError(f"bad arch token {tok!r} (want cNxK or dN)")
    return ArchitectureSpec(p=p, classes=classes, conv=tuple(conv),
                            dense=tuple(dense), param_seed=param_seed)


def _channel_params(text: str | None) -> ChannelModelParams:
    if not text:
        return ChannelModelParams()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
    else:
        with open(_resolve(text), "r") as fh:
            data = json.load(fh)
    return ChannelModelParams(**data)


def write_perturbation(path, delta: np.ndarray, report: dict) -> None:
    payload = np.empty(2 * len(delta), dtype="<f8")
    payload[0::2] = delta.real
    payload[1::2] = delta.imag
    write_container(path, _PERT_FMT, dict(report, p=len(delta)), payload.tobytes())


def read_perturbation(path) -> tuple[np.ndarray, dict]:
    header, payload = read_container(path, _PERT_FMT)
    flat = np.frombuffer(payload, dtype="<f8")
    delta = flat[0::2] + 1j * flat[1::2]
    return delta, header


def _cmd_synth(args) -> int:
    spec = GenerationSpec(
        classes=_parse_classes(args.classes),
        snr_grid_db=tuple(_parse_snr(t) for t in args.snr_grid.split(",")),
        per_class_per_snr=args.per_class,
        seed=args.seed, p=args.p, osf=args.osf, train_frac=args.train_frac,
        pulse=PulseSpec(kind=args.pulse, rolloff=args.rolloff, span=args.span))
    ds = build_dataset(spec)
    save_dataset(_resolve(args.out), ds)
    print(f"wrote {len(ds)} samples to {_resolve(args.out)}")
    return 0


def _cmd_train(args) -> int:
    ds = load_dataset(_resolve(args.data))
    spec = _parse_arch(args.arch, ds.spec.p, ds.spec.classes, args.param_seed)
    model = new_model(spec)
    jitter = None if args.no_jitter else tuple(
        float(t) for t in args.jitter.split(","))
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch,
                      learn_rate=args.lr, lr_decay=args.lr_decay,
                      seed=args.seed, noise_jitter_db=jitter,
                      verbose=args.verbose)
    metrics = train(model, ds, cfg)
    out = _resolve(args.out)
    save_model(out, model)
    metrics_path = _resolve(args.metrics) if args.metrics else out + ".metrics.json"
    meta = dict(metrics)
    meta["flags"] = {"data": args.data, "arch": args.arch, "epochs": args.epochs,
                     "batch": args.batch, "lr": args.lr,
                     "lr_decay": args.lr_decay, "seed": args.seed,
                     "param_seed": args.param_seed,
                     "jitter": None if args.no_jitter else args.jitter}
    with open(metrics_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    acc = metrics["test_accuracy"]
    print(f"wrote {out}; train acc {metrics['train_accuracy']:.4f}"
          + (f", test acc {acc:.4f}" if acc is not None else ""))
    return 0


def _cmd_eval(args) -> int:
    model = load_model(_resolve(args.model))
    ds = load_dataset(_resolve(args.data))
    snr = None if args.snr == "all" else _parse_snr(args.snr)
    split = None if args.split == "all" else args.split
    x, y = ds.as_arrays(split, snr)
    if len(x) == 0:
        raise ConfigurationError(f"no samples for split={args.split} snr={args.snr}")
    acc = model.accuracy(x, y)
    print(f"accuracy={acc:.6f} n={len(x)}")
    return 0


def _cmd_attack(args) -> int:
    model = load_model(_resolve(args.model))
    ds = load_dataset(_resolve(args.data))
    snr_bucket = None if args.eval_snr == "all" else _parse_snr(args.eval_snr)
    subset = ds.subset(args.split, snr_bucket)
    if not (0 <= args.index < len(subset)):
        raise ConfigurationError(
            f"--index {args.index} out of range; subset has {len(subset)} samples")
    sample = subset[args.index]
    x = sample.iq
    y = ds.class_index(sample.label)

    channel_params = _channel_params(args.channel_params)
    sigma2 = 10.0 ** (-args.snr / 10.0)
    budget = pnr_to_budget(args.pnr, sigma2, model.spec.p, args.pnr_reference,
                           channel_params)
    params = attack_params_from_dict(json.loads(args.attack_params)
                                     if args.attack_params else {})
    h_ar = sample_channel(channel_params, model.spec.p,
                          derive_rng(args.seed, "chan", 0))

    crafting = None
    if args.kind in _UAP_KINDS:
        crafting = make_crafting_set(ds, snr_bucket, args.craft_split,
                                     params.uap_count)
    substitute = load_model(_resolve(args.substitute)) if args.substitute else None

    flags = {"kind": args.kind, "pnr_db": args.pnr, "snr_db": args.snr,
             "pnr_reference": args.pnr_reference, "seed": args.seed,
             "index": args.index, "split": args.split, "eval_snr": args.eval_snr}
    if args.kind in _UNIVERSAL_CACHED:
        rng = derive_rng(args.seed, "uapcraft", args.kind, budget.p_max)
        if args.kind == "uap-limited":
            uap = craft_uap_limited(model, crafting, channel_params, budget, rng,
                                    params.uap_inner,
                                    {"epochs": params.uap_inner_epochs},
                                    params.center_rows)
        else:
            if substitute is None:
                raise ConfigurationError("uap-blackbox needs --substitute")
            uap = craft_uap_blackbox(substitute, crafting, channel_params, budget,
                                     rng, params.uap_inner,
                                     {"epochs": params.uap_inner_epochs},
                                     params.center_rows)
        delta, report = uap.delta, uap.report()
    else:
        rng = derive_rng(args.seed, "attack", args.kind, 0)
        outcome = _outcome_for(args.kind, model, x, y, h_ar, budget, params,
                               rng, crafting, channel_params)
        delta, report = outcome.delta, outcome.report()
    report["flags"] = flags

    out = _resolve(args.out)
    write_perturbation(out, delta, report)
    report_path = _resolve(args.report) if args.report else out + ".json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} (kind={args.kind}, |delta|^2={float(np.sum(np.abs(delta) ** 2)):.6g})")
    return 0


def _outcome_for(kind, model, x, y, h_ar, budget, params, rng, crafting,
                 channel_params):
    """Full AttackOutcome/UapPerturbation for the report (not just delta)."""
    from . import attacks as atk
    from . import universal as uni
    if kind == "noch":
        return atk.targeted_noch(model, x, y, budget, params.search)
    if kind == "channel-inversion":
        base = atk.targeted_noch(model, x, y, budget, params.search)
        return atk.targeted_channel_inversion(
            budget.amplitude * base.direction, h_ar, budget)
    if kind == "mmse-targeted":
        return atk.targeted_mmse(model, x, y, h_ar, budget, params.search,
                                 params.mmse)
    if kind == "mrpp-targeted":
        return atk.targeted_mrpp(model, x, y, h_ar, budget, params.search)
    if kind == "naive-nontargeted":
        return atk.nontargeted_naive(model, x, y, h_ar, budget, params.epochs)
    if kind == "mmse-nontargeted":
        return atk.nontargeted_mmse(model, x, y, h_ar, budget, params.epochs,
                                    params.mmse)
    if kind == "mrpp-nontargeted":
        return atk.nontargeted_mrpp(model, x, y, h_ar, budget, params.epochs)
    if kind == "limited-channel":
        return uni.craft_limited_channel(
            model, x, y, channel_params, budget, params.uap_channels, rng,
            params.uap_inner, {"epochs": params.uap_inner_epochs},
            params.center_rows)
    if kind == "uap-inputs":
        return uni.craft_uap_inputs(
            model, crafting, h_ar, budget, params.uap_inner,
            {"epochs": params.uap_inner_epochs}, params.center_rows)
    raise ConfigurationError(f"unknown attack kind {kind!r}")


def _cmd_sweep(args) -> int:
    cfg = load_sweep_config(_resolve(args.config))
    rows = sweep_from_config(cfg, threads=args.threads)
    out = _resolve(args.out) or cfg.get("out")
    if not out:
        raise ConfigurationError("no output path: pass --out or set \"out\" in the config")
    write_sweep_csv(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_plot(args) -> int:
    plot_csv(_resolve(args.csv), _resolve(args.out), title=args.title)
    print(f"wrote {_resolve(args.out)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfadv",
        description="Over-the-air adversarial attacks on a modulation "
                    "classifier: data synthesis, training, attack crafting, "
                    "accuracy sweeps, plots.",
        epilog=_KIND_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic I/Q dataset")
    sp.add_argument("--classes", default=",".join(m.value for m in ModulationType),
                    help="comma-separated class names (default: all eleven)")
    sp.add_argument("--snr-grid", default="10",
                    help="comma-separated SNRs in dB; \"inf\" = noiseless")
    sp.add_argument("--per-class", type=int, required=True,
                    help="samples per (class, SNR) cell")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--p", type=int, default=128, help="samples per example")
    sp.add_argument("--osf", type=int, default=8, help="samples per symbol")
    sp.add_argument("--train-frac", type=float, default=0.8)
    sp.add_argument("--pulse", choices=("rc", "rrc"), default="rc")
    sp.add_argument("--rolloff", type=float, default=0.35)
    sp.add_argument("--span", type=int, default=12)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_synth)

    tp = sub.add_parser("train", help="train a classifier on a dataset")
    tp.add_argument("--data", required=True)
    tp.add_argument("--arch", default="c16x5,c8x3,d64",
                    help="layer spec: cFILTERSxWIDTH conv tokens then dN dense")
    tp.add_argument("--epochs", type=int, default=30)
    tp.add_argument("--batch", type=int, default=64)
    tp.add_argument("--lr", type=float, default=0.2)
    tp.add_argument("--lr-decay", type=float, default=1.0)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--param-seed", type=int, default=0)
    tp.add_argument("--jitter", default="6,30",
                    help="augmentation SNR range lo,hi in dB")
    tp.add_argument("--no-jitter", action="store_true")
    tp.add_argument("--metrics", default=None,
                    help="metrics JSON path (default: <out>.metrics.json)")
    tp.add_argument("--verbose", action="store_true")
    tp.add_argument("--out", required=True)
    tp.set_defaults(fn=_cmd_train)

    ep = sub.add_parser("eval", help="clean accuracy of a model on a dataset")
    ep.add_argument("--model", required=True)
    ep.add_argument("--data", required=True)
    ep.add_argument("--split", default="test", help="train, test, or all")
    ep.add_argument("--snr", default="all", help="SNR bucket in dB, inf, or all")
    ep.set_defaults(fn=_cmd_eval)

    ap = sub.add_parser("attack", help="craft one perturbation and report it",
                        epilog=_KIND_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--model", required=True)
    ap.add_argument("--data", required=True, help="dataset supplying the input")
    ap.add_argument("--kind", required=True, choices=ATTACK_KINDS,
                    metavar="KIND", help="attack kind (full list below)")
    ap.add_argument("--pnr", type=float, required=True,
                    help="perturbation-to-noise ratio in dB")
    ap.add_argument("--snr", type=float, default=10.0,
                    help="receiver SNR in dB fixing the noise floor")
    ap.add_argument("--pnr-reference", choices=("receiver", "adversary"),
                    default="receiver")
    ap.add_argument("--channel-params", default=None,
                    help="inline JSON object or path to one")
    ap.add_argument("--attack-params", default=None,
                    help="inline JSON of attack knobs (epochs, gammas, ...)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--index", type=int, default=0,
                    help="which sample of the chosen split/SNR to attack")
    ap.add_argument("--split", default="test")
    ap.add_argument("--eval-snr", default="inf",
                    help="SNR bucket of the attacked sample")
    ap.add_argument("--craft-split", default="train",
                    help="split supplying UAP crafting inputs")
    ap.add_argument("--substitute", default=None,
                    help="substitute model file for uap-blackbox")
    ap.add_argument("--report", default=None,
                    help="JSON report path (default: <out>.json)")
    ap.add_argument("--out", required=True, help="perturbation file")
    ap.set_defaults(fn=_cmd_attack)

    wp = sub.add_parser("sweep", help="accuracy-vs-PNR sweep from a config file")
    wp.add_argument("--config", required=True)
    wp.add_argument("--out", default=None, help="CSV path (overrides config)")
    wp.add_argument("--threads", type=int, default=None,
                    help="worker cap (overrides config)")
    wp.set_defaults(fn=_cmd_sweep)

    pp = sub.add_parser("plot", help="render a sweep CSV as an SVG")
    pp.add_argument("--csv", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--title", default="accuracy vs PNR")
    pp.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RfadvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
