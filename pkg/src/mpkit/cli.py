"""Command-line entry point.

Subcommands: gen-data, train, eval, landscape, equivalency.  Exit codes:
0 success, 2 config/usage error, 3 numeric failure, 4 I/O error.  All
randomness flows from the single master seed ([experiment] seed or --seed);
MPKIT_THREADS caps the --jobs worker count.  Every command writes a resolved
copy of its configuration into the output directory and refuses to write
into an existing directory unless --force is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import data as dat
from .config import (ConfigError, RunConfig, build_dataset, build_network,
                     build_predictive_config, build_test_dataset, build_train_config,
                     load_config, parse_aug, parse_base_measure, resolved_text,
                     split_holdout, train_dtype)
from .margin import run_equivalency_experiment, write_equivalency_outputs
from .metrics import evaluate, predictive_entropy, predictive_uncertainty
from .network import NumericError, ShapeError
from .posterior import (Ensemble, STREAM_EVAL, load_ensemble, member_rng, predict_proba,
                        save_ensemble, train_bb, train_de, train_dp_mp, train_mixup,
                        train_mixup_mp, SeparationError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _effective_jobs(jobs: int) -> int:
    cap = os.environ.get("MPKIT_THREADS")
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"MPKIT_THREADS must be an integer, got {cap!r}") from None
    return max(1, jobs)


def _prepare_out(out_dir: str, force: bool) -> Path:
    out = Path(out_dir)
    if out.exists() and not force:
        raise FileExistsError(f"output directory {out} exists; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(cfg: RunConfig, out: Path) -> None:
    (out / "resolved.ini").write_text(resolved_text(cfg))


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(cfg: RunConfig, out_dir: str, force: bool) -> int:
    if cfg.get("dataset", "kind") != "synthetic":
        raise ConfigError("gen-data only generates synthetic datasets")
    dataset = build_dataset(cfg)
    out = _prepare_out(out_dir, force)
    dat.save_csv(dataset, out / "data.csv")
    manifest = dict(dataset.meta)
    manifest["rows"] = len(dataset)
    manifest["num_classes"] = dataset.num_classes
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    _write_resolved(cfg, out)
    return EXIT_OK


def _mc_inference_keys(cfg: RunConfig, spec, method: str) -> dict:
    """Implicit-ensemble inference settings recorded in the manifest."""
    from .network import Dropout
    rates = [l.rate for l in spec.layers if isinstance(l, Dropout) and l.rate > 0]
    passes = cfg.getint("predictive", "mc_passes", None)
    if method == "mc-dropout" and passes is None:
        passes = 20
    if passes is None:
        return {}
    if not rates:
        raise ConfigError(f"{method} with mc_passes needs dropout in the network")
    return {"mc_passes": passes, "mc_rate": max(rates)}


def cmd_train(cfg: RunConfig, out_dir: str, force: bool, jobs: int) -> int:
    dataset = build_dataset(cfg)
    if cfg.get("dataset", "holdout") is not None:
        dataset, _ = split_holdout(dataset, cfg.getfloat("dataset", "holdout"), cfg.seed)
    spec = build_network(cfg, dataset)
    tcfg = build_train_config(cfg)
    dtype = train_dtype(cfg)
    method = cfg.get("predictive", "method", "de")
    members = cfg.getint("predictive", "members", 4)
    jobs = _effective_jobs(jobs)

    if method == "de":
        ens = train_de(dataset, spec, tcfg, members, dtype=dtype, jobs=jobs)
    elif method == "mc-dropout":
        ens = train_de(dataset, spec, tcfg, cfg.getint("predictive", "members", 1),
                       dtype=dtype, jobs=jobs)
        ens.provenance["algorithm"] = "mc-dropout"
    elif method == "bb":
        donor_path = cfg.get("predictive", "donor")
        donor = load_ensemble(donor_path) if donor_path else None
        ens = train_bb(dataset, spec, tcfg, members,
                       stabilized=cfg.getbool("predictive", "stabilized"),
                       bound_m=cfg.getfloat("predictive", "bound_m", None),
                       init_mode="from-ensemble" if donor else "random",
                       donor=donor, dtype=dtype, jobs=jobs)
    elif method == "dp-mp":
        bm = parse_base_measure(cfg, dataset)
        c = cfg.getfloat("predictive", "c", 1.0)
        t = cfg.getint("predictive", "t", len(dataset))
        ens = train_dp_mp(dataset, bm, c, t, spec, tcfg, members, dtype=dtype, jobs=jobs)
    elif method == "mixup-mp":
        pcfg = build_predictive_config(cfg)
        ens = train_mixup_mp(dataset, spec, tcfg, pcfg, members, dtype=dtype, jobs=jobs)
    elif method == "mixup":
        ens = train_mixup(dataset, spec, tcfg, cfg.getfloat("predictive", "alpha", 1.0),
                          parse_aug(cfg.get("predictive", "aug")),
                          cfg.getint("predictive", "t_mb", None),
                          num_members=members, dtype=dtype, jobs=jobs)
    else:
        raise ConfigError(f"[predictive] unknown method {method!r}")

    ens.provenance.update(_mc_inference_keys(cfg, spec, method))
    out = _prepare_out(out_dir, force)
    save_ensemble(ens, out, force=True)
    _write_resolved(cfg, out)
    return EXIT_OK


def _inference_dropout(ens: Ensemble):
    prov = ens.provenance
    if "mc_passes" in prov:
        rng = member_rng(int(prov.get("seed", 0)), 0, STREAM_EVAL)
        return (float(prov["mc_rate"]), int(prov["mc_passes"]), rng)
    return None


def cmd_eval(ensemble_dir: str, cfg: RunConfig, out_dir: str, force: bool) -> int:
    ens = load_ensemble(ensemble_dir)
    dataset = build_dataset(cfg)
    probs = predict_proba(ens, dataset.features, dropout=_inference_dropout(ens))
    labels = dataset.class_indices
    report = evaluate(probs, labels)
    out = _prepare_out(out_dir, force)
    (out / "report.json").write_text(report.to_json() + "\n")
    k = dataset.num_classes
    with open(out / "probabilities.csv", "w") as f:
        f.write("index,true_label," + ",".join(f"p{j}" for j in range(k))
                + ",entropy,uncertainty\n")
        for i, (row, lab) in enumerate(zip(probs, labels)):
            vals = ",".join(repr(float(v)) for v in row)
            f.write(f"{i},{int(lab)},{vals},{repr(predictive_entropy(row))},"
                    f"{repr(predictive_uncertainty(row, k))}\n")
    _write_resolved(cfg, out)
    return EXIT_OK


def cmd_landscape(ensemble_dir: str, cfg: RunConfig, out_dir: str, force: bool) -> int:
    ens = load_ensemble(ensemble_dir)
    dataset = build_dataset(cfg)
    if dataset.feature_shape != (2,):
        raise ShapeError("landscape export needs a 2D feature space")
    resolution = cfg.getint("experiment", "resolution", 100)
    padding = cfg.getfloat("experiment", "padding", 2.0)
    grid = dat.make_grid(dataset, padding, resolution)
    probs = predict_proba(ens, grid.points, dropout=_inference_dropout(ens))
    k = probs.shape[1]
    out = _prepare_out(out_dir, force)
    with open(out / "landscape.csv", "w") as f:
        f.write("x1,x2,uncertainty,entropy,predicted_class\n")
        for point, row in zip(grid.points, probs):
            f.write(f"{repr(float(point[0]))},{repr(float(point[1]))},"
                    f"{repr(predictive_uncertainty(row, k))},"
                    f"{repr(predictive_entropy(row))},{int(row.argmax())}\n")
    _write_resolved(cfg, out)
    return EXIT_OK


def cmd_equivalency(cfg: RunConfig, out_dir: str, force: bool) -> int:
    dataset = build_dataset(cfg)
    test_ds = build_test_dataset(cfg)
    if test_ds is None:
        holdout = cfg.getfloat("dataset", "holdout", 0.2)
        dataset, test_ds = split_holdout(dataset, holdout, cfg.seed)
    spec = build_network(cfg, dataset)
    tcfg = build_train_config(cfg, default_weight_decay=0.0)
    mode = cfg.get("experiment", "mode", "de-init")
    members = cfg.getint("predictive", "members", 4)
    every = cfg.getint("experiment", "checkpoint_every", 10)
    report = run_equivalency_experiment(dataset, test_ds, spec, tcfg, members,
                                        mode=mode, checkpoint_every=every,
                                        dtype=train_dtype(cfg))
    out = _prepare_out(out_dir, force)
    write_equivalency_outputs(report, out)
    _write_resolved(cfg, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpkit",
                                     description="Predictive-resampling ensembles for small networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run configuration (INI)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel ensemble members")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    common(sub.add_parser("gen-data", help="generate a synthetic dataset"))
    common(sub.add_parser("train", help="fit an ensemble"))
    p_eval = sub.add_parser("eval", help="calibration report for an ensemble")
    p_eval.add_argument("--ensemble", required=True, help="ensemble directory")
    common(p_eval)
    p_land = sub.add_parser("landscape", help="grid uncertainty export (2D features)")
    p_land.add_argument("--ensemble", required=True, help="ensemble directory")
    common(p_land)
    common(sub.add_parser("equivalency", help="paired ensemble-vs-bootstrap experiment"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        if args.command == "gen-data":
            return cmd_gen_data(cfg, args.out, args.force)
        if args.command == "train":
            return cmd_train(cfg, args.out, args.force, args.jobs)
        if args.command == "eval":
            return cmd_eval(args.ensemble, cfg, args.out, args.force)
        if args.command == "landscape":
            return cmd_landscape(args.ensemble, cfg, args.out, args.force)
        if args.command == "equivalency":
            return cmd_equivalency(cfg, args.out, args.force)
        raise ConfigError(f"unknown command {args.command!r}")
    except (NumericError, SeparationError) as e:
        print(f"mpkit: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, dat.DataError) as e:
        print(f"mpkit: i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ShapeError, ValueError) as e:
        print(f"mpkit: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
