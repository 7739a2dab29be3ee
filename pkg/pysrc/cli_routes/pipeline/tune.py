import os

from termcolor import colored

from pysrc.errors import EXIT_OK, HyprecError
from pysrc.helpers.pipeline.boxplots import box_stats
from pysrc.helpers.pipeline.search_space import load_search_space
from pysrc.helpers.pipeline.tuning import BEST_CONFIG, SEARCH_METHOD, TRIALS_CSV, tune
from pysrc.run_config import build_config
from pysrc.utils.tables import print_table
from pysrc.cli_routes.pipeline.common import prepare_split, print_saved, report_abort, report_failure


def impl_tune(config_path=None, overrides=None) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        space = load_search_space(config.search_space)
        split = prepare_split(config)
        print(
            colored(
                f"{SEARCH_METHOD.capitalize()} search: {config.tune_trials} trials x "
                f"{config.epochs_per_trial} epochs, seed {config.seed}",
                "cyan",
            )
        )
        result = tune(config, split, space, progress=not config.quiet)

        if result.failures:
            print(colored(f"{result.failures} trial(s) failed; see the error column.", "yellow"))
        stats = box_stats(result.trials)
        print_table(
            "Model",
            ["trials", "min", "q1", "median", "q3", "max"],
            [tuple(row) for row in stats[["model", "trials", "min", "q1", "median", "q3", "max"]].itertuples(index=False)],
        )
        best = result.best
        print(
            colored(
                f"Best trial {best['trial']}: {best['metric']} = {float(best['value']):.4f} "
                f"(lr {float(best['lr']):.2e}, d {best['latent_dim']}, batch {best['batch_size']})",
                "green",
            )
        )
        print_saved(os.path.join(result.out_dir, TRIALS_CSV))
        print_saved(os.path.join(result.out_dir, BEST_CONFIG))
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
