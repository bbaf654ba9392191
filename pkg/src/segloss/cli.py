"""The segloss command line: evaluate masks, verify approximation bounds,
and run the synthetic training experiments from a config file.

Exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numeric failure.
Every run with identical arguments, config and seed produces byte-identical
report files, regardless of --threads.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds as bounds_mod
from . import fileio
from .errors import DataError, NumericError, SeglossError, UsageError
from .losses import LossSpec, gamma_for_prior, parse_loss_spec
from .masks import BinaryMask, ProbMap, threshold
from .metrics import MetricValue, auxiliary_metric, dice, hamming, jaccard, tversky, weighted_hamming
from .stats import DEFAULT_RESAMPLES, ScoreVector, rank_methods
from .toytrain import (
    DEFAULT_GAIN_JITTER,
    FBETAS,
    FGBG_RATIOS,
    SWEEP_ALPHAS,
    SWEEP_EQUAL_ARMS,
    SyntheticConfig,
    TrainConfig,
    derive_seed,
    generate_dataset,
    run_fgbg_masking,
    run_loss_comparison,
    run_tversky_sweep,
    stratify_by_size,
)

DEFAULT_METRICS = "dice,jaccard"
FIG1_GRID = [round(0.1 + 0.05 * k, 10) for k in range(59)]  # 0.1 .. 3.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage -> 1
        raise UsageError(message)


def build_parser() -> _Parser:
    p = _Parser(prog="segloss", description=__doc__)
    p.add_argument("--seed", type=int, default=None,
                   help="override the experiment seed from the config")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for brute force and experiment arms")
    p.add_argument("--out-dir", default=".", help="directory for report files")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="discrete metrics for a mask pair")
    ev.add_argument("gt", help="ground-truth mask file (binary)")
    ev.add_argument("pred", help="prediction file (binary or probability)")
    ev.add_argument("--threshold", type=float, default=0.5,
                    help="binarization threshold for probability predictions")
    ev.add_argument("--metrics", default=DEFAULT_METRICS,
                    help="comma list: dice,jaccard,hamming,whamming:<g>,"
                         "tversky:<a>:<b>,fbeta:<b>,accuracy,hausdorff,avd")

    bo = sub.add_parser("bounds", help="closed-form and brute-force bounds")
    bo.add_argument("--pair", default=None,
                    help="dice-jaccard | dice-tversky:<a>:<b> | dice-whamming[:<g>]")
    bo.add_argument("--dmax", type=int, default=5,
                    help="verify empirical suprema for d = 1..dmax (<= 12)")
    bo.add_argument("--fig1-grid", action="store_true",
                    help="emit closed-form error curves for equal Tversky "
                         "weights over [0.1, 3.0] step 0.05")

    tr = sub.add_parser("train", help="loss-comparison experiment from a config")
    tr.add_argument("config", help="flat key = value config file")

    sw = sub.add_parser("sweep", help="Tversky weight sweep from a config")
    sw.add_argument("config", help="flat key = value config file")

    rp = sub.add_parser("report", help="pretty-print a JSON report")
    rp.add_argument("path", help="a .json report produced by another command")
    return p


def _parse_eval_metric(token: str):
    parts = token.strip().split(":")
    head = parts[0]
    if head == "dice" and len(parts) == 1:
        return lambda y, p: MetricValue("dice", dice(y, p))
    if head == "jaccard" and len(parts) == 1:
        return lambda y, p: MetricValue("jaccard", jaccard(y, p))
    if head == "hamming" and len(parts) == 1:
        return lambda y, p: MetricValue("hamming", hamming(y, p))
    if head == "whamming" and len(parts) == 2:
        g = float(parts[1])
        return lambda y, p: MetricValue(f"whamming:{g:g}", weighted_hamming(y, p, g))
    if head == "tversky" and len(parts) == 3:
        a, b = float(parts[1]), float(parts[2])
        return lambda y, p: MetricValue(f"tversky:{a:g}:{b:g}", tversky(y, p, a, b))
    if head == "fbeta" and len(parts) == 2:
        b = float(parts[1])
        return lambda y, p: auxiliary_metric("fbeta", y, p, b=b)
    if head in ("accuracy", "hausdorff", "avd") and len(parts) == 1:
        return lambda y, p: auxiliary_metric(head, y, p)
    raise UsageError(f"unknown metric token {token!r}")


def cmd_evaluate(args) -> int:
    gt = fileio.read_mask(args.gt).payload
    if not isinstance(gt, BinaryMask):
        raise DataError(f"{args.gt}: ground truth must be a binary mask")
    pred = fileio.read_mask(args.pred).payload
    if isinstance(pred, ProbMap):
        pred = threshold(pred, args.threshold)
    fns = [_parse_eval_metric(tok) for tok in args.metrics.split(",") if tok.strip()]
    if not fns:
        raise UsageError("no metrics requested")
    rows = []
    for fn in fns:
        mv = fn(gt, pred)
        rows.append([mv.name, mv.value if mv.defined else None, mv.defined])
    table = fileio.ReportTable("evaluate", ["metric", "value", "defined"], rows)
    fileio.write_report(table, args.out_dir, "evaluate")
    return 0


def _bits_string(mask: BinaryMask) -> str:
    return "".join(str(int(v)) for v in mask.data)


def cmd_bounds(args) -> int:
    if args.fig1_grid:
        rows = []
        for alpha in FIG1_GRID:
            a_err, r_err = bounds_mod.tversky_dice_bounds(alpha, alpha)
            rows.append([alpha, a_err, r_err])
        table = fileio.ReportTable("fig1_grid", ["alpha", "abs_error", "rel_error"], rows)
        fileio.write_report(table, args.out_dir, "fig1_grid")
        return 0
    if args.pair is None:
        raise UsageError("either --pair or --fig1-grid is required")
    name_a, _, name_b = args.pair.partition("-")
    if not name_a or not name_b:
        raise UsageError(f"--pair must look like dice-jaccard, got {args.pair!r}")
    rows = []
    for d in range(1, args.dmax + 1):
        rep = bounds_mod.brute_force_sup(name_a, name_b, d, threads=args.threads)
        w = rep.witness
        rows.append([
            d, rep.metric_a, rep.metric_b,
            rep.closed_form_abs, rep.closed_form_rel,
            rep.empirical_abs, rep.empirical_rel,
            w.tp if w else None, w.fp if w else None, w.fn if w else None,
            w.n_true if w else None, w.n_pred if w else None,
            _bits_string(w.y) if w else None, _bits_string(w.yhat) if w else None,
        ])
    table = fileio.ReportTable(
        "bounds",
        ["d", "metric_a", "metric_b", "closed_abs", "closed_rel",
         "empirical_abs", "empirical_rel", "witness_tp", "witness_fp",
         "witness_fn", "witness_n_true", "witness_n_pred", "witness_y",
         "witness_yhat"],
        rows,
    )
    safe = args.pair.replace(":", "_")
    fileio.write_report(table, args.out_dir, f"bounds_{safe}")
    return 0


_COMMON_SCHEMA = {
    "n_images": fileio.cfg_int,
    "nx": fileio.cfg_int,
    "ny": fileio.cfg_int,
    "radius_min": fileio.cfg_float,
    "radius_max": fileio.cfg_float,
    "fg_prior": fileio.cfg_float,
    "noise_sigma": fileio.cfg_float,
    "gain_jitter": fileio.cfg_float,
    "data_seed": fileio.cfg_int,
    "learning_rate": fileio.cfg_float,
    "max_epochs": fileio.cfg_int,
    "batch_size": fileio.cfg_int,
    "pretrain_epochs_ce": fileio.cfg_int,
    "early_stop_patience": fileio.cfg_int,
    "folds": fileio.cfg_int,
    "seed": fileio.cfg_int,
    "n_resamples": fileio.cfg_int,
}

TRAIN_SCHEMA = dict(_COMMON_SCHEMA, losses=fileio.cfg_str_list, fgbg_ratios=fileio.cfg_float_list)
SWEEP_SCHEMA = dict(_COMMON_SCHEMA, alphas=fileio.cfg_float_list, equal_alphas=fileio.cfg_float_list)


def _experiment_setup(cfg: dict, seed_override: int | None):
    seed = cfg.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    synth = SyntheticConfig(
        n_images=cfg.get("n_images", 200),
        dims=(cfg.get("nx", 64), cfg.get("ny", 64)),
        object_radius_range=(cfg.get("radius_min", 3.0), cfg.get("radius_max", 9.0)),
        fg_prior_target=cfg.get("fg_prior", 0.02),
        noise_sigma=cfg.get("noise_sigma", 0.3),
        gain_jitter=cfg.get("gain_jitter", DEFAULT_GAIN_JITTER),
        seed=cfg.get("data_seed", derive_seed(seed, 17)),
    )
    base = TrainConfig(
        loss=LossSpec.ce(),
        learning_rate=cfg.get("learning_rate", 4.0),
        max_epochs=cfg.get("max_epochs", 120),
        batch_size=cfg.get("batch_size", 4),
        pretrain_epochs_ce=cfg.get("pretrain_epochs_ce", 10),
        early_stop_patience=cfg.get("early_stop_patience", 12),
    )
    return seed, synth, base, cfg.get("folds", 5), cfg.get("n_resamples", DEFAULT_RESAMPLES)


def _resolve_losses(tokens, data) -> list[LossSpec]:
    """Loss tokens from the config; bare "wce" takes the balancing gamma
    from the measured dataset foreground prior."""
    specs = []
    for tok in tokens:
        if tok in ("wce", "wce:auto"):
            specs.append(LossSpec.wce(gamma_for_prior(data.mean_fg_prior())))
        else:
            specs.append(parse_loss_spec(tok))
    return specs


def _arm_filename(name: str) -> str:
    return name.replace(":", "_").replace(".", "p")


def _write_scores(result, out_dir: str, prefix: str = "scores") -> None:
    for arm in result.arms:
        rows = []
        for i in range(result.folds.size):
            rows.append([
                i, int(result.folds[i]), int(result.fg_sizes[i]),
                float(arm.dice[i]), float(arm.jaccard[i]),
                *(float(arm.fbeta[b][i]) for b in FBETAS),
            ])
        cols = ["image", "fold", "fg_size", "dice", "jaccard"] + [f"f{b:g}" for b in FBETAS]
        table = fileio.ReportTable(f"{prefix}_{arm.name}", cols, rows)
        fileio.write_report(table, out_dir, f"{prefix}_{_arm_filename(arm.name)}")


def _rank_and_write(result, out_dir: str, n_resamples: int, seed: int,
                    basename: str = "significance"):
    vectors = [ScoreVector(a.name, a.dice) for a in result.arms]
    matrix = rank_methods(vectors, n_resamples, derive_seed(seed, 1001))
    rows = [
        [a, b, matrix.p_values[(a, b)]]
        for a in matrix.methods for b in matrix.methods if a != b
    ]
    fileio.write_report(
        fileio.ReportTable(basename, ["method_a", "method_b", "p_superior"], rows),
        out_dir, basename,
    )
    return matrix


def _write_summary(result, matrix, out_dir: str, basename: str = "summary") -> None:
    rows = []
    for arm in result.arms:
        rows.append([
            arm.name, arm.mean_dice(), arm.mean_jaccard(),
            *(float(arm.fbeta[b].mean()) for b in FBETAS),
            arm.name in matrix.top_ranked, arm.name in matrix.inferior_to_all,
        ])
    cols = (["method", "mean_dice", "mean_jaccard"]
            + [f"mean_f{b:g}" for b in FBETAS] + ["top_ranked", "inferior_to_all"])
    fileio.write_report(fileio.ReportTable(basename, cols, rows), out_dir, basename)


def _write_strata(result, out_dir: str, basename: str = "strata") -> None:
    strata = stratify_by_size(result, 10)
    rows = []
    for b, (count, msize) in enumerate(zip(strata.bin_counts, strata.mean_size)):
        for name, means in strata.mean_dice.items():
            rows.append([b, count, msize, name, means[b]])
    fileio.write_report(
        fileio.ReportTable(basename, ["bin", "n_images", "mean_fg_size", "method", "mean_dice"], rows),
        out_dir, basename,
    )


def cmd_train(args) -> int:
    cfg = fileio.load_config(args.config, TRAIN_SCHEMA)
    seed, synth, base, folds, n_resamples = _experiment_setup(cfg, args.seed)
    data = generate_dataset(synth)
    losses = _resolve_losses(cfg.get("losses", ["ce", "soft_dice"]), data)
    result = run_loss_comparison(data, losses, folds, seed, base, threads=args.threads)
    _write_scores(result, args.out_dir)
    matrix = _rank_and_write(result, args.out_dir, n_resamples, seed)
    _write_summary(result, matrix, args.out_dir)
    _write_strata(result, args.out_dir)
    for ratio in cfg.get("fgbg_ratios", []):
        runs = run_fgbg_masking(data, [ratio], folds=folds, seed=seed,
                                base_cfg=base, threads=args.threads)
        run = runs[0]
        tag = f"fgbg_{ratio:g}".replace(".", "p")
        _write_scores(run.result, args.out_dir, prefix=f"{tag}_scores")
        m = _rank_and_write(run.result, args.out_dir, n_resamples,
                            derive_seed(seed, round(ratio * 1000)), f"{tag}_significance")
        rows = [
            [run.ratio, run.rect_w, run.rect_h, run.achieved_fraction, a.name,
             a.mean_dice(), a.mean_jaccard(), a.name in m.top_ranked]
            for a in run.result.arms
        ]
        fileio.write_report(
            fileio.ReportTable(
                f"{tag}_summary",
                ["ratio", "rect_w", "rect_h", "achieved_fraction", "method",
                 "mean_dice", "mean_jaccard", "top_ranked"],
                rows,
            ),
            args.out_dir, f"{tag}_summary",
        )
    return 0


def cmd_sweep(args) -> int:
    cfg = fileio.load_config(args.config, SWEEP_SCHEMA)
    seed, synth, base, folds, n_resamples = _experiment_setup(cfg, args.seed)
    data = generate_dataset(synth)
    alphas = cfg.get("alphas", list(SWEEP_ALPHAS))
    equal_arms = cfg.get("equal_alphas", list(SWEEP_EQUAL_ARMS))
    result = run_tversky_sweep(data, alphas, equal_arms, folds, seed, base,
                               threads=args.threads)
    _write_scores(result, args.out_dir)
    matrix = _rank_and_write(result, args.out_dir, n_resamples, seed)
    _write_summary(result, matrix, args.out_dir, basename="sweep_summary")
    _write_strata(result, args.out_dir)
    return 0


def cmd_report(args) -> int:
    table = fileio.read_report_json(args.path)
    widths = [len(c) for c in table.columns]
    formatted = []
    for row in table.rows:
        cells = [fileio.format_cell(v) for v in row]
        widths = [max(w, len(c)) for w, c in zip(widths, cells)]
        formatted.append(cells)
    print(f"# {table.name}")
    print("  ".join(c.ljust(w) for c, w in zip(table.columns, widths)))
    for cells in formatted:
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        handler = {
            "evaluate": cmd_evaluate,
            "bounds": cmd_bounds,
            "train": cmd_train,
            "sweep": cmd_sweep,
            "report": cmd_report,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"segloss: usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"segloss: data error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"segloss: data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"segloss: numeric failure: {exc}", file=sys.stderr)
        return 3
    except SeglossError as exc:
        print(f"segloss: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
