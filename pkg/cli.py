import sys

import click
from termcolor import colored

from pysrc.errors import EXIT_OK, EXIT_USAGE
from pysrc.helpers.curvature.svd import EMBEDDINGS
from pysrc.helpers.models.registry import MODEL_FAMILIES
from pysrc.helpers.recdata.loading import FORMATS
from pysrc.helpers.recdata.splitting import HOLDOUT_RULES
from pysrc.run_config import C_POLICIES, PROTOCOLS, PT_MODES

from pysrc.cli_routes.pipeline.estimate_curvature import impl_estimate_curvature
from pysrc.cli_routes.pipeline.split import impl_split
from pysrc.cli_routes.pipeline.train import impl_train
from pysrc.cli_routes.pipeline.tune import impl_tune
from pysrc.cli_routes.pipeline.evaluate import impl_evaluate
from pysrc.cli_routes.pipeline.report import impl_report


# RunConfig field -> click option; every option defaults to None so that
# unset flags fall through to the config file and the dataclass defaults.
RUN_OPTIONS = {
    "dataset": (("--dataset",), dict(type=click.Path(dir_okay=False), help="Interaction file.")),
    "fmt": (("--fmt",), dict(type=click.Choice(list(FORMATS)), help="Interaction file format.")),
    "min_user_items": (("--min-user-items",), dict(type=int, help="Drop users with fewer items.")),
    "rating_threshold": (("--rating-threshold",), dict(type=float, help="Minimum rating that counts as an interaction.")),
    "protocol": (("--protocol",), dict(type=click.Choice(PROTOCOLS), help="Evaluation protocol.")),
    "n_negatives": (("--n-negatives",), dict(type=int, help="Sampled negatives per user (weak).")),
    "holdout": (("--holdout",), dict(type=click.Choice(HOLDOUT_RULES), help="Held-out item rule (weak).")),
    "foldin_ratio": (("--foldin-ratio",), dict(type=float, help="Fold-in share of a held-out user's items (strong).")),
    "n_val_users": (("--n-val-users",), dict(type=int, help="Validation users (strong).")),
    "n_test_users": (("--n-test-users",), dict(type=int, help="Test users (strong).")),
    "split_dir": (("--split-dir",), dict(type=click.Path(file_okay=False), help="Split directory (default <output-dir>/split).")),
    "rank": (("--rank",), dict(type=int, help="Truncated SVD rank for curvature estimation.")),
    "sample_size": (("--sample-size",), dict(type=int, help="Points per δ trial.")),
    "delta_trials": (("--delta-trials",), dict(type=int, help="Number of δ trials.")),
    "embedding": (("--embedding",), dict(type=click.Choice(EMBEDDINGS), help="Item embedding taken from the SVD.")),
    "raw_delta": (("--raw-delta",), dict(is_flag=True, default=False, help="Use δ without diameter normalization.")),
    "model": (("--model",), dict(type=click.Choice(MODEL_FAMILIES), help="Model family.")),
    "c_policy": (("--c-policy",), dict(type=click.Choice(C_POLICIES), help="How the curvature is chosen.")),
    "c": (("--c",), dict(type=float, help="Curvature for --c-policy fixed.")),
    "latent_dim": (("--latent-dim",), dict(type=int, help="Latent dimension (rank for puresvd).")),
    "beta": (("--beta",), dict(type=float, help="KL weight (hvae).")),
    "hidden_tanh": (("--hidden-tanh",), dict(is_flag=True, default=False, help="Tangent-space tanh between the hyperbolic layers.")),
    "lr": (("--lr",), dict(type=float, help="Learning rate.")),
    "batch_size": (("--batch-size",), dict(type=int, help="Users per batch.")),
    "epochs": (("--epochs",), dict(type=int, help="Training epochs.")),
    "clip_norm": (("--clip-norm",), dict(type=float, help="Global gradient-norm clip, 0 disables.")),
    "per_coordinate_v": (("--per-coordinate-v",), dict(is_flag=True, default=False, help="Per-coordinate second moment for ball tensors.")),
    "pt_approx": (("--pt-approx",), dict(type=click.Choice(PT_MODES), help="Momentum transport for ball tensors.")),
    "tune_trials": (("--trials", "tune_trials"), dict(type=int, help="Tuning trials.")),
    "epochs_per_trial": (("--epochs-per-trial",), dict(type=int, help="Epoch budget per trial.")),
    "search_space": (("--search-space",), dict(type=click.Path(dir_okay=False), help="key=value search-space file.")),
    "seed": (("--seed",), dict(type=int, help="Global seed (default $HYPREC_SEED or 0).")),
    "workers": (("--workers",), dict(type=int, help="Worker threads/processes.")),
    "eval_batch": (("--eval-batch",), dict(type=int, help="Users scored per evaluation batch.")),
    "output_dir": (("--output-dir",), dict(type=click.Path(file_okay=False), help="Where artifacts go (default .hyprec).")),
    "quiet": (("--quiet",), dict(is_flag=True, default=False, help="No spinners or progress bars.")),
}

DATA = ("dataset", "fmt", "min_user_items", "rating_threshold")
SPLIT = ("protocol", "n_negatives", "holdout", "foldin_ratio", "n_val_users", "n_test_users", "split_dir")
CURVATURE = ("rank", "sample_size", "delta_trials", "embedding", "raw_delta")
MODEL = ("model", "c_policy", "c", "latent_dim", "beta", "hidden_tanh")
OPTIM = ("lr", "batch_size", "epochs", "clip_norm", "per_coordinate_v", "pt_approx")
TUNING = ("tune_trials", "epochs_per_trial", "search_space")
RUN = ("seed", "workers", "eval_batch", "output_dir", "quiet")


def run_options(*groups):
    def decorate(fn):
        names = [name for group in groups for name in group]
        for name in reversed(names):
            decls, kwargs = RUN_OPTIONS[name]
            fn = click.option(*decls, **kwargs)(fn)
        return click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key=value config file.")(fn)

    return decorate


def _overrides(options):
    # flags that were not given come back False; let them fall through too
    return {k: v for k, v in options.items() if v is not None and v is not False}


def _cutoffs(value):
    if value is None:
        return None
    try:
        return sorted({int(v) for v in value.split(",") if v.strip()})
    except ValueError:
        raise click.BadParameter("expected comma-separated integers, e.g. 1,5,10")


@click.group()
def cli():
    pass


@cli.command("estimate-curvature")
@run_options(DATA, CURVATURE, RUN)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Result JSON (default <output-dir>/curvature.json).")
def estimate_curvature(config_path=None, out_path=None, **options):
    return impl_estimate_curvature(config_path, _overrides(options), out_path=out_path)


@cli.command("split")
@run_options(DATA, SPLIT, RUN)
def split(config_path=None, **options):
    return impl_split(config_path, _overrides(options))


@cli.command("train")
@run_options(DATA, SPLIT, CURVATURE, MODEL, OPTIM, RUN)
@click.option("--run-dir", type=click.Path(file_okay=False), help="Checkpoint directory (default <output-dir>/runs/<model>).")
@click.option("--resume", is_flag=True, default=False, help="Continue from last.ckpt in the run directory.")
def train(config_path=None, run_dir=None, resume=False, **options):
    return impl_train(config_path, _overrides(options), out_dir=run_dir, resume=resume)


@cli.command("tune")
@run_options(DATA, SPLIT, CURVATURE, MODEL, OPTIM, TUNING, RUN)
def tune(config_path=None, **options):
    return impl_tune(config_path, _overrides(options))


@cli.command("evaluate")
@run_options(DATA, SPLIT, RUN)
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint to score.")
@click.option("--group", type=click.Choice(["test", "val"]), default="test", show_default=True, help="Users to evaluate.")
@click.option("--cutoffs", help="Comma-separated N values (default 1,5,10 weak / 50,100 strong).")
def evaluate(config_path=None, checkpoint=None, group="test", cutoffs=None, **options):
    return impl_evaluate(config_path, _overrides(options), checkpoint=checkpoint, group=group, cutoffs=_cutoffs(cutoffs))


@cli.command("report")
@click.argument("paths", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@run_options(("output_dir",))
def report(paths, config_path=None, **options):
    return impl_report(list(paths), config_path, _overrides(options))


def main(argv=None) -> int:
    try:
        code = cli.main(args=argv, prog_name="hyprec", standalone_mode=False)
    except click.exceptions.Abort:
        print(colored("Process aborted by user.", "red"))
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
