import os

from termcolor import colored

from pysrc.errors import EXIT_OK, DataError, HyprecError
from pysrc.helpers.evalharness.protocols import STRONG_CUTOFFS, WEAK_CUTOFFS, evaluate_strong, evaluate_weak
from pysrc.helpers.models.checkpoint import load_checkpoint
from pysrc.helpers.models.registry import model_from_checkpoint
from pysrc.helpers.provenance import short_hash
from pysrc.helpers.recdata.splitting import weak_validation
from pysrc.run_config import build_config
from pysrc.run_stage import run_stage
from pysrc.utils.tables import print_table
from pysrc.cli_routes.pipeline.common import prepare_split, print_saved, report_abort, report_failure


def print_report(report) -> None:
    columns = report.columns()
    print_table("Model", columns, [(report.model,) + tuple(report.metrics[c] for c in columns)])


def impl_evaluate(config_path=None, overrides=None, checkpoint=None, group="test", cutoffs=None) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        if not checkpoint:
            raise DataError("No checkpoint given (--checkpoint).")
        ckpt = run_stage(f"Loading {checkpoint}...", load_checkpoint, checkpoint, debug_dir=config.debug_dir, quiet=config.quiet)
        model = model_from_checkpoint(ckpt)
        split = prepare_split(config)
        if model.n_items != split.n_items:
            raise DataError(f"Checkpoint scores {model.n_items} items but the split has {split.n_items}.")

        progress = not config.quiet
        if split.protocol == "weak":
            target = weak_validation(split) if group == "val" else split
            report = evaluate_weak(
                model.score,
                target,
                cutoffs=cutoffs or WEAK_CUTOFFS,
                batch_size=config.eval_batch,
                model=model.describe(),
                group=group,
                progress=progress,
            )
        else:
            report = evaluate_strong(
                model.score,
                split,
                group=group,
                cutoffs=cutoffs or STRONG_CUTOFFS,
                batch_size=config.eval_batch,
                model=model.describe(),
                progress=progress,
            )
        report.config = ckpt.header.get("config")
        report.config_hash = ckpt.header.get("config_hash")
        report.extra.update(
            train_seed=ckpt.header.get("seed"),
            split_seed=split.seed,
            checkpoint_epoch=ckpt.epoch,
        )

        print_report(report)
        stem = f"{model.family}_{report.protocol}_{group}"
        paths = report.write(os.path.join(config.output_dir, "reports"), stem=stem)
        print(colored(f"{report.n_users} users evaluated in {report.wall_time:.1f}s", "cyan"))
        print(colored(f"Config {short_hash(report.config_hash)}, train seed {report.extra['train_seed']}, split seed {split.seed}", "cyan"))
        print_saved(paths["json"])
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
