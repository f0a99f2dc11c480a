"""Command-line entry points for the adaptation pipeline.

Subcommands operate on a directory of EMB1 files tied together by a
``stream.manifest``:

    gen-synth        write a synthetic benchmark stream
    pretrain-source  fit the source model from labeled source files
    adapt-target     continually adapt over unlabeled target files
    eval             score a model (or per-task snapshots) on eval files
    dwt-golden       write or check wavelet conformance vectors
    inspect          decode any of the binary/text artifacts

Exit codes: 0 success, 1 usage or protocol violation, 2 malformed file,
3 numerical failure.

``adapt-target`` enforces the source-free protocol twice over: it refuses
to read any file whose name marks it as source data, and the report's
``files_read`` audit lists every file the run actually opened.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from .config import RunConfig, format_config, load_config, parse_config, save_config
from .emb1 import peek_emb1, read_emb1, write_emb1
from .errors import (
    DegenerateEmbeddingError,
    DegenerateScaleError,
    EmptyModelError,
    FormatError,
    FrozenModelError,
    InvalidParameterError,
    InvalidWeightError,
    NotFinalizedError,
    ProtocolError,
    ShapeError,
    SingularCovarianceError,
)
from .klda import KldaModel
from .manifest import ManifestTask, StreamManifest, read_manifest, write_manifest
from .pipeline import (
    AccuracyMatrix,
    TaskSpec,
    adapt_target,
    build_rff_map,
    evaluate_task,
    evaluate_tasks,
    gen_synthetic_sfcdcl,
    pretrain_source,
)
from .wavelet import golden_grid, golden_payload, read_golden, write_golden

_GEN_NAMES = {
    "source_train": "source_task{k}.emb1",
    "target_train": "target_task{k}.emb1",
    "target_eval": "eval_task{k}.emb1",
    "vlm_train": "vlmscores_task{k}.emb1",
    "vlm_eval": "vlmscores_eval_task{k}.emb1",
}
_GOLDEN_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- shared helpers ---------------------------------------------------------


def _resolve_config(args, sidecar=None) -> RunConfig:
    """Config file (or the first existing sidecar), overridden by --set pairs."""
    base_text = ""
    explicit = getattr(args, "config", None)
    sidecars = [sidecar] if isinstance(sidecar, (str, bytes)) else list(sidecar or [])
    if explicit:
        with open(explicit, "r", encoding="utf-8") as fh:
            base_text = fh.read()
    else:
        for candidate in sidecars:
            if os.path.exists(candidate):
                with open(candidate, "r", encoding="utf-8") as fh:
                    base_text = fh.read()
                break
    overrides = "\n".join(getattr(args, "set", None) or [])
    return parse_config(base_text + "\n" + overrides)


def _check_model_dim(model: KldaModel, config: RunConfig):
    if model.feature_dim != config.d_rff:
        raise InvalidParameterError(
            f"model feature dim {model.feature_dim} != configured d_rff "
            f"{config.d_rff}; pass the config the model was trained with"
        )


def _guard_source_free(path: str):
    if os.path.basename(path).startswith("source"):
        raise ProtocolError(
            f"source-free adaptation must not read source data: {path}"
        )


def _load_tasks(man, role, audit, *, source_free=False, drop_labels=False):
    tasks = []
    for mt in man.tasks:
        path = man.path(mt.task_id, role)
        if source_free:
            _guard_source_free(path)
        emb = read_emb1(path, audit)
        if emb.dim != man.dim:
            raise FormatError(
                f"{path}: dim {emb.dim} does not match manifest dim {man.dim}"
            )
        labels = None if drop_labels else emb.labels
        tasks.append(TaskSpec(mt.task_id, mt.class_ids, role, emb.features, labels))
    return tasks


def _load_tables(man, role, audit, *, source_free=False):
    tables = []
    for mt in man.tasks:
        path = man.path(mt.task_id, role)
        if source_free:
            _guard_source_free(path)
        emb = read_emb1(path, audit)
        if emb.dim != len(mt.class_ids):
            raise FormatError(
                f"{path}: {emb.dim} columns but task {mt.task_id} has {len(mt.class_ids)} classes"
            )
        tables.append(emb.features)
    return tables


def _config_dict(config: RunConfig) -> dict:
    return {k: v for k, v in dataclasses.asdict(config).items()}


def _write_report(report: dict, path):
    if not path:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _matrix_rows(matrix: AccuracyMatrix):
    rows = []
    for k in range(matrix.task_count):
        rows.append(
            [
                None if np.isnan(matrix.values[k, j]) else round(float(matrix.values[k, j]), 6)
                for j in range(matrix.task_count)
            ]
        )
    return rows


# --- subcommands ------------------------------------------------------------


def cmd_gen_synth(args) -> int:
    stream = gen_synthetic_sfcdcl(
        class_count=args.classes,
        task_count=args.tasks,
        dim=args.dim,
        samples_per_class=args.samples_per_class,
        eval_per_class=args.eval_per_class,
        separation=args.separation,
        noise=args.noise,
        angle_deg=args.angle,
        translation=args.translation,
        scale=args.scale,
        zero_shot_acc=args.zero_shot_acc,
        seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    tasks = []
    for k in range(stream.task_count):
        names = {role: tmpl.format(k=k) for role, tmpl in _GEN_NAMES.items()}
        write_emb1(
            os.path.join(args.out, names["source_train"]),
            stream.source_train[k].features,
            stream.source_train[k].labels,
        )
        # source-free protocol: target training files carry no labels
        write_emb1(
            os.path.join(args.out, names["target_train"]),
            stream.target_train[k].features,
        )
        write_emb1(
            os.path.join(args.out, names["target_eval"]),
            stream.target_eval[k].features,
            stream.target_eval[k].labels,
        )
        write_emb1(os.path.join(args.out, names["vlm_train"]), stream.vlm_train[k])
        write_emb1(os.path.join(args.out, names["vlm_eval"]), stream.vlm_eval[k])
        tasks.append(
            ManifestTask(
                task_id=k,
                class_ids=stream.target_train[k].class_ids,
                files=names,
            )
        )
    man = StreamManifest(
        dim=stream.dim,
        class_count=stream.class_count,
        task_count=stream.task_count,
        tasks=tasks,
        root=args.out,
    )
    write_manifest(man, os.path.join(args.out, "stream.manifest"))
    print(
        f"wrote {stream.task_count} tasks x {len(_GEN_NAMES)} files + stream.manifest to {args.out}"
    )
    return 0


def cmd_pretrain_source(args) -> int:
    t0 = time.time()
    man = read_manifest(args.manifest)
    config = _resolve_config(args)
    audit = []
    tasks = _load_tasks(man, "source_train", audit)
    for task in tasks:
        if task.labels is None:
            raise ProtocolError(f"source file for task {task.task_id} has no labels")
    model, rff_map = pretrain_source(tasks, config)
    model.save(args.out)
    save_config(config, args.out + ".config")
    self_acc = evaluate_tasks(model, rff_map, tasks, config)
    report = {
        "command": "pretrain-source",
        "config": _config_dict(config),
        "input_dim": man.dim,
        "files_read": audit,
        "tasks": [
            {
                "task_id": t.task_id,
                "classes": list(t.class_ids),
                "samples": t.count,
                "self_accuracy": round(acc, 6),
            }
            for t, acc in zip(tasks, self_acc)
        ],
        "model": os.path.abspath(args.out),
        "elapsed_seconds": round(time.time() - t0, 6),
    }
    _write_report(report, args.report)
    for entry in report["tasks"]:
        print(
            f"task {entry['task_id']}: {entry['samples']} samples, "
            f"self-accuracy {entry['self_accuracy']:.4f}"
        )
    print(f"saved model to {args.out}")
    return 0


def cmd_adapt_target(args) -> int:
    t0 = time.time()
    man = read_manifest(args.manifest)
    config = _resolve_config(args, sidecar=args.model + ".config")
    model = KldaModel.load(args.model)
    _check_model_dim(model, config)
    audit = []
    tasks = _load_tasks(man, "target_train", audit, source_free=True, drop_labels=True)
    tables = _load_tables(man, "vlm_train", audit, source_free=True)
    rff_map = build_rff_map(config, man.dim)
    os.makedirs(args.out, exist_ok=True)
    result = adapt_target(
        model, rff_map, tasks, tables, config, snapshot_dir=args.out
    )
    final_path = os.path.join(args.out, "model.klda")
    model.save(final_path)
    save_config(config, os.path.join(args.out, "run.config"))
    report = {
        "command": "adapt-target",
        "config": _config_dict(config),
        "input_dim": man.dim,
        "files_read": audit,
        "tasks": [
            {
                "task_id": s.task_id,
                "samples": s.sample_count,
                "accepted": s.accepted_count,
                "ingested": s.ingested_count,
                "mean_weight": round(s.mean_weight, 6),
                "mean_alpha": round(s.mean_alpha, 6),
            }
            for s in result.task_stats
        ],
        "model": os.path.abspath(final_path),
        "snapshots": [os.path.abspath(p) for p in result.snapshot_paths],
        "elapsed_seconds": round(time.time() - t0, 6),
    }
    _write_report(report, args.report)
    for entry in report["tasks"]:
        print(
            f"task {entry['task_id']}: accepted {entry['accepted']}/{entry['samples']}, "
            f"mean weight {entry['mean_weight']:.4f}"
        )
    print(f"saved adapted model to {final_path}")
    return 0


def cmd_eval(args) -> int:
    t0 = time.time()
    man = read_manifest(args.manifest)
    if bool(args.model) == bool(args.snapshot_dir):
        raise InvalidParameterError("pass exactly one of --model or --snapshot-dir")
    if args.model:
        # models saved by adapt-target sit next to a run.config instead of
        # carrying their own sidecar
        sidecar = [
            args.model + ".config",
            os.path.join(os.path.dirname(os.path.abspath(args.model)), "run.config"),
        ]
    else:
        sidecar = [os.path.join(args.snapshot_dir, "run.config")]
    config = _resolve_config(args, sidecar=sidecar)
    if args.fused:
        config = dataclasses.replace(config, fused_inference=True)
    audit = []
    eval_tasks = _load_tasks(man, "target_eval", audit)
    tables = None
    if config.fused_inference:
        tables = _load_tables(man, "vlm_eval", audit)
    rff_map = build_rff_map(config, man.dim)
    report = {
        "command": "eval",
        "config": _config_dict(config),
        "input_dim": man.dim,
        "files_read": audit,
        "elapsed_seconds": None,
    }
    if args.model:
        model = KldaModel.load(args.model)
        _check_model_dim(model, config)
        accs = evaluate_tasks(model, rff_map, eval_tasks, config, tables)
        report["accuracies"] = [round(a, 6) for a in accs]
        report["mean_accuracy"] = round(float(np.mean(accs)), 6)
        for t, acc in zip(eval_tasks, accs):
            print(f"task {t.task_id}: accuracy {acc:.4f}")
        print(f"mean accuracy {report['mean_accuracy']:.4f}")
    else:
        matrix = AccuracyMatrix(man.task_count)
        for k in range(man.task_count):
            snap = os.path.join(args.snapshot_dir, f"model_task{k}.klda")
            model = KldaModel.load(snap)
            _check_model_dim(model, config)
            for j in range(k + 1):
                table_j = tables[j] if tables is not None else None
                matrix.set(
                    k, j, evaluate_task(model, rff_map, eval_tasks[j], config, table_j)
                )
        report["matrix"] = _matrix_rows(matrix)
        report["final_average"] = round(matrix.final_average(), 6)
        report["backward_transfer"] = round(matrix.backward_transfer(), 6)
        for k in range(man.task_count):
            row = " ".join(f"{matrix.values[k, j]:.4f}" for j in range(k + 1))
            print(f"after task {k}: {row}")
        print(f"final average {report['final_average']:.4f}")
        print(f"backward transfer {report['backward_transfer']:+.4f}")
    report["elapsed_seconds"] = round(time.time() - t0, 6)
    _write_report(report, args.report)
    return 0


def cmd_dwt_golden(args) -> int:
    if args.check:
        values = read_golden(args.check)
        grid = values[:64].reshape(8, 8)
        expected = golden_payload(grid)
        err = float(np.abs(values - expected).max())
        if err > _GOLDEN_TOL:
            print(f"FAIL: golden file deviates from the transform by {err:.3e}")
            return 3
        builtin = float(np.abs(grid - golden_grid()).max())
        tag = "builtin grid" if builtin == 0.0 else "custom grid"
        print(f"ok: transform-consistent within {_GOLDEN_TOL:.0e} ({tag})")
        return 0
    write_golden(args.out)
    print(f"wrote golden vectors to {args.out}")
    return 0


def cmd_inspect(args) -> int:
    with open(args.file, "rb") as fh:
        head = fh.read(4)
    if head == b"EMB1":
        info = peek_emb1(args.file)
        emb = read_emb1(args.file)
        print(f"format=emb1 version={info['version']}")
        print(f"count={info['count']} dim={info['dim']}")
        print(f"labeled={str(info['labeled']).lower()} triple={str(info['triple']).lower()}")
        if emb.labels is not None:
            uniq = np.unique(emb.labels)
            print(f"label_values={','.join(str(v) for v in uniq.tolist())}")
        return 0
    if head == b"KLDA":
        model = KldaModel.load(args.file)
        print("format=klda version=1")
        print(f"feature_dim={model.feature_dim} classes={model.num_classes}")
        print(
            f"weighted={str(model.weighted).lower()} finalized={str(model.finalized).lower()} "
            f"mean_mode={model.mean_mode}"
        )
        print(f"total_count={model.total_count} total_weight_sum={model.total_weight_sum:.6f}")
        print(f"class_ids={','.join(str(c) for c in model.class_ids)}")
        return 0
    size = os.path.getsize(args.file)
    if size == 2048:
        values = read_golden(args.file)
        print("format=dwt-golden values=256")
        print(f"grid_first_row={','.join(f'{v:g}' for v in values[:8])}")
        return 0
    try:
        man = read_manifest(args.file)
    except (FormatError, UnicodeDecodeError):
        raise FormatError(f"unrecognized file {args.file}") from None
    print(f"format=manifest dim={man.dim} classes={man.class_count} tasks={man.task_count}")
    for task in man.tasks:
        roles = ",".join(sorted(task.files))
        print(f"task {task.task_id}: classes={list(task.class_ids)} roles={roles}")
    return 0


# --- parser -----------------------------------------------------------------


def _add_config_args(sub):
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="kladapt", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    g = subs.add_parser("gen-synth", help="write a synthetic benchmark stream")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--classes", type=int, default=12)
    g.add_argument("--tasks", type=int, default=4)
    g.add_argument("--dim", type=int, default=8)
    g.add_argument("--samples-per-class", type=int, default=50)
    g.add_argument("--eval-per-class", type=int, default=20)
    g.add_argument("--separation", type=float, default=6.0)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--angle", type=float, default=30.0)
    g.add_argument("--translation", type=float, default=1.0)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--zero-shot-acc", type=float, default=0.85)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen_synth)

    p = subs.add_parser("pretrain-source", help="fit the source model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", help="JSON report path")
    _add_config_args(p)
    p.set_defaults(func=cmd_pretrain_source)

    a = subs.add_parser("adapt-target", help="adapt over unlabeled target tasks")
    a.add_argument("--manifest", required=True)
    a.add_argument("--model", required=True, help="pretrained model file")
    a.add_argument("--out", required=True, help="directory for snapshots + final model")
    a.add_argument("--report", help="JSON report path")
    _add_config_args(a)
    a.set_defaults(func=cmd_adapt_target)

    e = subs.add_parser("eval", help="score a model on the eval files")
    e.add_argument("--manifest", required=True)
    e.add_argument("--model", help="single model file")
    e.add_argument("--snapshot-dir", help="directory of per-task model_task<k>.klda")
    e.add_argument("--fused", action="store_true", help="fuse with zero-shot tables")
    e.add_argument("--report", help="JSON report path")
    _add_config_args(e)
    e.set_defaults(func=cmd_eval)

    d = subs.add_parser("dwt-golden", help="write or check wavelet golden vectors")
    group = d.add_mutually_exclusive_group(required=True)
    group.add_argument("--out", help="write golden vectors here")
    group.add_argument("--check", help="verify an existing golden file")
    d.set_defaults(func=cmd_dwt_golden)

    i = subs.add_parser("inspect", help="decode an artifact and print its header")
    i.add_argument("file")
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateScaleError, SingularCovarianceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        ProtocolError,
        InvalidParameterError,
        InvalidWeightError,
        ShapeError,
        DegenerateEmbeddingError,
        FrozenModelError,
        NotFinalizedError,
        EmptyModelError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
