from typing import Optional

from termcolor import colored

from pysrc.errors import EXIT_USAGE, HyprecError
from pysrc.run_config import DEFAULT_OUTPUT_DIR, RunConfig
from pysrc.run_stage import write_debug_error


def report_failure(e: HyprecError, config: Optional[RunConfig]) -> int:
    print(colored(f"{type(e).__name__}: {e}", "red"))
    debug_dir = config.debug_dir if config is not None else f"{DEFAULT_OUTPUT_DIR}/debug"
    write_debug_error(debug_dir, f"{type(e).__name__}: {e}\n")
    return e.exit_code


def report_abort() -> int:
    print(colored("Process aborted by user.", "red"))
    return EXIT_USAGE


def print_saved(path: str) -> None:
    print(colored(f"Saved to {path}", "green"))


def prepare_split(config: RunConfig):
    """Reuse the split directory when present, otherwise build it from the dataset and save it."""
    from pysrc.helpers.pipeline.splits import load_dataset, make_split, read_split, split_exists, write_split
    from pysrc.run_stage import run_stage

    split_dir = config.resolved_split_dir
    if split_exists(split_dir):
        return run_stage(f"Loading split from {split_dir}...", read_split, config, debug_dir=config.debug_dir, quiet=config.quiet)
    config.require("dataset")
    m = run_stage(f"Loading {config.dataset}...", load_dataset, config, debug_dir=config.debug_dir, quiet=config.quiet)
    split = run_stage(f"Building {config.protocol} split...", make_split, m, config, debug_dir=config.debug_dir, quiet=config.quiet)
    write_split(split, config)
    print(colored(f"Split saved to {split_dir} (seed {split.seed})", "green"))
    return split
