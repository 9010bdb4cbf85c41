"""Command line interface.

Every subcommand prints a JSON report to stdout. The exit status is 0 on
success and 2 when the input is invalid (any toolbox error, a missing file,
or bad arguments).

A trained model is stored as a directory holding ``config.json`` (the
pipeline configuration), ``lda.json`` and, for CSP pipelines, a ``csp``
container with the filter matrix.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import make_data, sampling_rate
from .errors import BciError, IoFailure
from .features import CspModel, signed_r_squared
from .formats import (
    default_layout,
    grid_layout,
    import_ascii_matrix,
    load_data,
    read_layout,
    save_data,
)
from .ml import lda_from_json, lda_to_json
from .online import (
    PipelineConfig,
    ReplaySource,
    csp_config,
    erp_config,
    pipeline_csp,
    pipeline_erp,
    run_offline,
    run_online,
    train_csp_pipeline,
    train_erp,
)
from .sigproc import apply_filter, design_bandpass, filtfilt, segment

EXIT_OK = 0
EXIT_INVALID = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on its own; raise instead so the error is reported as JSON
    def error(self, message):
        raise UsageError(message)


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=1, sort_keys=True, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _summary(data) -> dict:
    return {"shape": list(data.shape), "names": list(data.names), "units": list(data.units),
            "n_markers": len(data.markers) if data.markers is not None else 0}


def _read_lines(path) -> list[str]:
    return [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


# ----------------------------------------------------------------------------
# model directories


def save_model(out_dir, cfg: PipelineConfig, lda, csp: CspModel | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n",
                                     encoding="utf-8")
    (out / "lda.json").write_text(lda_to_json(lda) + "\n", encoding="utf-8")
    if csp is not None:
        n = csp.W.shape[0]
        w = make_data(csp.W, [[f"ch{i}" for i in range(n)], [f"csp{i}" for i in range(n)]],
                      ["channel", "component"], ["#", "#"],
                      {"A": csp.A.tolist(), "lambdas": csp.lambdas.tolist(),
                       "classes": list(csp.classes)})
        save_data(w, out / "csp")


def load_model(model_dir):
    d = Path(model_dir)
    try:
        cfg = PipelineConfig.from_dict(json.loads((d / "config.json").read_text(encoding="utf-8")))
        lda = lda_from_json((d / "lda.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read model from {d}: {exc}") from None
    csp = None
    if (d / "csp").exists():
        w = load_data(d / "csp")
        csp = CspModel(np.array(w.values), np.array(w.extra["A"]),
                       np.array(w.extra["lambdas"]), tuple(w.extra["classes"]))
    return cfg, lda, csp


# ----------------------------------------------------------------------------
# subcommands


def cmd_convert(args) -> dict:
    names = _read_lines(args.channels) if args.channels else None
    data = import_ascii_matrix(args.signal, args.markers, args.fs, names)
    save_data(data, args.out)
    return {"command": "convert", "out": str(args.out), **_summary(data)}


def cmd_filter(args) -> dict:
    data = load_data(args.input)
    fs = args.fs or sampling_rate(data)
    coeffs = design_bandpass(args.band[0], args.band[1], fs, args.order)
    out = filtfilt(data, coeffs) if args.zero_phase else apply_filter(data, coeffs)[0]
    save_data(out, args.out)
    return {"command": "filter", "out": str(args.out), "band_hz": list(args.band),
            "order": args.order, "zero_phase": bool(args.zero_phase), **_summary(out)}


def _class_defs(items) -> dict:
    defs = {}
    for item in items:
        label, sep, cls = item.partition("=")
        if not sep or not label or not cls:
            raise UsageError(f"class definition {item!r} is not LABEL=CLASS")
        defs[label] = cls
    return defs


def cmd_epoch(args) -> dict:
    data = load_data(args.input)
    epo = segment(data, data.markers, _class_defs(args.classes), tuple(args.interval))
    save_data(epo, args.out)
    return {"command": "epoch", "out": str(args.out), **_summary(epo)}


def _config(default, config_path, fs):
    cfg = default(fs)
    if config_path:
        overrides = json.loads(Path(config_path).read_text(encoding="utf-8"))
        cfg = cfg.replace(**overrides)
    return cfg


def cmd_train_erp(args) -> dict:
    train = load_data(args.train)
    cfg = _config(erp_config, args.config, sampling_rate(train))
    lda = train_erp(train, cfg)
    save_model(args.model, cfg, lda)
    return {"command": "train-erp", "model": str(args.model), "shrinkage_gamma": lda.gamma,
            "n_features": int(len(lda.w))}


def cmd_train_csp(args) -> dict:
    train = load_data(args.train)
    cfg = _config(csp_config, args.config, sampling_rate(train))
    if args.classes:
        cfg = cfg.replace(class_defs={c: c for c in args.classes}, positive_class=args.classes[0])
    csp, lda = train_csp_pipeline(train, cfg)
    save_model(args.model, cfg, lda, csp)
    return {"command": "train-csp", "model": str(args.model), "shrinkage_gamma": lda.gamma,
            "csp_lambdas": csp.lambdas.tolist()}


def _decision_report(decisions, data) -> dict:
    epochs = [d for d in decisions if d.kind == "epoch"]
    chars = [d for d in decisions if d.kind == "character"]
    rep = {"n_epochs": len(epochs), "n_characters": len(chars),
           "decisions": [d.to_dict() for d in decisions]}
    if chars:
        spelled = "".join(d.label for d in chars)
        rep["letters_predicted"] = spelled
        truth = data.extra.get("text")
        if truth:
            rep["letters_true"] = truth
            rep["letter_accuracy"] = sum(a == b for a, b in zip(spelled, truth)) / len(truth)
    elif epochs:
        rep["accuracy"] = sum(d.label == d.event for d in epochs) / len(epochs)
    return rep


def cmd_classify(args) -> dict:
    cfg, lda, csp = load_model(args.model)
    data = load_data(args.input)
    decisions = run_offline(data, cfg, lda, csp)
    return {"command": "classify", **_decision_report(decisions, data)}


def cmd_simulate_online(args) -> dict:
    cfg, lda, csp = load_model(args.model)
    data = load_data(args.input)
    t0 = time.perf_counter()
    decisions = run_online(ReplaySource(data, args.block_samples, args.realtime), cfg, lda, csp)
    wall = time.perf_counter() - t0
    rep = _decision_report(decisions, data)
    lat = [d.latency_ms for d in decisions]
    return {"command": "simulate-online", "block_samples": args.block_samples,
            "realtime": bool(args.realtime), "wall_s": wall,
            "max_latency_ms": max(lat) if lat else 0.0, **rep}


def _layout(choice):
    if choice is None or choice == "1020":
        return default_layout()
    if choice.startswith("grid"):
        rows, _, cols = choice[4:].partition("x")
        return grid_layout(int(rows or 8), int(cols or 8))
    return read_layout(choice)


def cmd_plot_scalp(args) -> dict:
    from .viz import interpolate_scalp, render_scalp

    data = load_data(args.input)
    if data.ndim != 1:
        # pick one sample of a (..., time, channel) tensor
        if "time" not in data.names:
            raise UsageError("scalp plots need a channel vector or a time axis")
        t = data.axis("time")
        idx = int(np.argmin(np.abs(t - args.time)))
        x = np.moveaxis(data.values, data.names.index("time"), 0)[idx]
        x = x.reshape(-1, x.shape[-1]).mean(axis=0)
        chans = data.axis("channel")
        values = make_data(x, [chans], ["channel"], [data.units[-1]])
    else:
        values = data
    lim = tuple(args.limits) if args.limits else None
    field = interpolate_scalp(values, _layout(args.layout), args.resolution)
    render_scalp(field, args.out, lim)
    return {"command": "plot-scalp", "out": str(args.out), "n_channels": int(values.shape[0])}


def cmd_plot_timecourse(args) -> dict:
    from .viz import render_timecourse

    data = load_data(args.input)
    titles = render_timecourse(data, args.channels, args.out)
    return {"command": "plot-timecourse", "out": str(args.out), "panels": titles}


def cmd_plot_r2(args) -> dict:
    from .viz import render_r2_map

    data = load_data(args.input)
    r2 = signed_r_squared(data) if data.ndim == 3 else data
    render_r2_map(r2, args.order or [], args.out)
    return {"command": "plot-r2", "out": str(args.out), "max_abs_r2": float(np.max(np.abs(r2.values)))}


# ---- competition data ---------------------------------------------------------

ERP_FS = 240.0
CSP_FS = 1000.0


def _need(path: Path) -> Path:
    if not path.exists():
        raise IoFailure(f"missing {path}; see scripts/convert_bci_comp3.py for the expected files")
    return path


def _load_ascii(prefix: Path, fs: float, text: bool = False):
    names_file = prefix.with_name(prefix.name + "_channels.txt")
    names = _read_lines(names_file) if names_file.exists() else None
    extra = {}
    if text:
        extra["text"] = _need(prefix.with_name(prefix.name + "_text.txt")).read_text(
            encoding="utf-8").strip()
    return import_ascii_matrix(_need(prefix.with_name(prefix.name + "_signal.txt")),
                               _need(prefix.with_name(prefix.name + "_markers.txt")),
                               fs, names, extra)


def reproduce_erp(data_dir) -> dict:
    d = Path(data_dir)
    subjects = sorted(p.name[:-len("_Train_signal.txt")] for p in d.glob("*_Train_signal.txt"))
    if not subjects:
        _need(d / "Subject_A_Train_signal.txt")
    per = {}
    for s in subjects:
        train = _load_ascii(d / f"{s}_Train", ERP_FS, text=True)
        test = _load_ascii(d / f"{s}_Test", ERP_FS, text=True)
        per[s] = pipeline_erp(train, test, erp_config(ERP_FS))
    acc = float(np.mean([r["letter_accuracy"] for r in per.values()]))
    return {"pipeline": "erp", "subjects": per, "letter_accuracy": acc,
            "floor": 0.85, "passed": acc >= 0.85}


def reproduce_csp(data_dir) -> dict:
    d = Path(data_dir)
    train = _load_ascii(d / "Competition_train", CSP_FS)
    test = _load_ascii(d / "Competition_test", CSP_FS)
    classes = tuple(dict.fromkeys(train.markers.labels))
    # skip the first 500 ms of each trial: the trials are stored back to back,
    # so the causal filter settles there after the cut
    cfg = csp_config(CSP_FS, classes=classes, interval_ms=(500.0, 3000.0))
    rep = pipeline_csp(train, test, cfg)
    return {**rep, "floor": 0.85, "passed": rep["accuracy"] >= 0.85}


def cmd_reproduce(args) -> dict:
    rep = reproduce_erp(args.data_dir) if args.which == "erp" else reproduce_csp(args.data_dir)
    return {"command": "reproduce", **rep}


def cmd_synth(args) -> dict:
    from .synthetic import make_oscillatory_recording, make_p300_recording

    out = Path(args.out_dir)
    if args.which == "erp":
        train = make_p300_recording(args.train_text, True, seed=args.seed,
                                    repetitions=args.repetitions)
        test = make_p300_recording(args.test_text, False, seed=args.seed + 1,
                                   repetitions=args.repetitions)
    else:
        rng = np.random.default_rng(args.seed)
        mixing = rng.standard_normal((16, 16))
        train = make_oscillatory_recording(args.trials, seed=args.seed, mixing=mixing)
        test = make_oscillatory_recording(args.trials, seed=args.seed + 1, mixing=mixing)
    save_data(train, out / "train")
    save_data(test, out / "test")
    return {"command": "synth", "which": args.which, "train": _summary(train),
            "test": _summary(test), "out_dir": str(out)}


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcikit", description="BCI signal processing toolbox")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("convert", help="ASCII matrix (+ marker file) to a container")
    s.add_argument("signal")
    s.add_argument("out")
    s.add_argument("--markers")
    s.add_argument("--fs", type=float, required=True)
    s.add_argument("--channels", help="text file with one channel name per line")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("filter", help="Butterworth band-pass")
    s.add_argument("input")
    s.add_argument("out")
    s.add_argument("--band", type=float, nargs=2, required=True, metavar=("LOW", "HIGH"))
    s.add_argument("--order", type=int, default=5)
    s.add_argument("--fs", type=float)
    s.add_argument("--zero-phase", action="store_true")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("epoch", help="cut epochs around markers")
    s.add_argument("input")
    s.add_argument("out")
    s.add_argument("--interval", type=float, nargs=2, required=True, metavar=("START", "END"))
    s.add_argument("--classes", nargs="+", required=True, metavar="LABEL=CLASS")
    s.set_defaults(func=cmd_epoch)

    for name, func, help_ in (("train-erp", cmd_train_erp, "train a P300 speller model"),
                              ("train-csp", cmd_train_csp, "train a CSP + LDA model")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("train")
        s.add_argument("model", help="output model directory")
        s.add_argument("--config", help="JSON file with configuration overrides")
        if name == "train-csp":
            s.add_argument("--classes", nargs=2, metavar="CLASS")
        s.set_defaults(func=func)

    s = sub.add_parser("classify", help="offline classification with a trained model")
    s.add_argument("model")
    s.add_argument("input")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("simulate-online", help="replay a recording through the online loop")
    s.add_argument("model")
    s.add_argument("input")
    s.add_argument("--block-samples", type=int, default=12)
    s.add_argument("--realtime", action="store_true")
    s.set_defaults(func=cmd_simulate_online)

    s = sub.add_parser("plot-scalp", help="scalp map")
    s.add_argument("input")
    s.add_argument("out")
    s.add_argument("--layout", help="'1020' (default), 'gridRxC' or a layout file")
    s.add_argument("--time", type=float, default=0.0, help="ms, for data with a time axis")
    s.add_argument("--limits", type=float, nargs=2)
    s.add_argument("--resolution", type=int, default=64)
    s.set_defaults(func=cmd_plot_scalp)

    s = sub.add_parser("plot-timecourse", help="one panel per channel")
    s.add_argument("input")
    s.add_argument("out")
    s.add_argument("--channels", nargs="+", required=True)
    s.set_defaults(func=cmd_plot_timecourse)

    s = sub.add_parser("plot-r2", help="signed r-squared heat map")
    s.add_argument("input", help="epoched data or a (time, channel) r2 container")
    s.add_argument("out")
    s.add_argument("--order", nargs="*", help="channel order, top to bottom")
    s.set_defaults(func=cmd_plot_r2)

    s = sub.add_parser("reproduce", help="competition data pipelines")
    s.add_argument("which", choices=["erp", "csp"])
    s.add_argument("--data-dir", required=True)
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("synth", help="write synthetic train/test recordings")
    s.add_argument("which", choices=["erp", "csp"])
    s.add_argument("out_dir")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--train-text", default="BCIKIT")
    s.add_argument("--test-text", default="HELLO")
    s.add_argument("--repetitions", type=int, default=15)
    s.add_argument("--trials", type=int, default=50, help="trials per class")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, BciError, OSError, KeyError, ValueError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc).strip("'\"")})
        return EXIT_INVALID
    _emit(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
