import os

from termcolor import colored

from pysrc.errors import EXIT_OK, HyprecError
from pysrc.helpers.pipeline.training import train_model
from pysrc.run_config import build_config
from pysrc.cli_routes.pipeline.common import prepare_split, print_saved, report_abort, report_failure


def run_dir(config, explicit=None) -> str:
    return explicit or os.path.join(config.output_dir, "runs", config.model)


def impl_train(config_path=None, overrides=None, out_dir=None, resume=False) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        split = prepare_split(config)
        target = run_dir(config, out_dir)
        result = train_model(config, split, target, resume=resume, progress=not config.quiet)

        if result.resumed_from is not None:
            print(colored(f"Resumed after epoch {result.resumed_from}.", "cyan"))
        if result.delta_estimate is not None:
            print(colored(f"Estimated c = {result.delta_estimate.c:.6g}", "cyan"))
        if result.rejected_steps:
            print(colored(f"{result.rejected_steps} step(s) skipped on non-finite gradients.", "yellow"))
        if result.best_epoch is None:
            print(colored("No epochs run; saved the initialization.", "yellow"))
        else:
            print(
                colored(
                    f"Best validation {result.metric} = {result.best_value:.4f} at epoch {result.best_epoch}",
                    "green",
                )
            )
        print_saved(result.best_checkpoint)
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
