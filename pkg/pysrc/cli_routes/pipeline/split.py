from termcolor import colored

from pysrc.errors import EXIT_OK, HyprecError
from pysrc.helpers.pipeline.splits import load_dataset, make_split, write_split
from pysrc.run_config import build_config
from pysrc.run_stage import run_stage
from pysrc.cli_routes.pipeline.common import print_saved, report_abort, report_failure


def impl_split(config_path=None, overrides=None) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        config.require("dataset")
        m = run_stage(f"Loading {config.dataset}...", load_dataset, config, debug_dir=config.debug_dir, quiet=config.quiet)
        if m.dropped_users:
            print(colored(f"Dropped {m.dropped_users} user(s) below min_user_items.", "yellow"))
        split = run_stage(
            f"Building {config.protocol} split...",
            make_split,
            m,
            config,
            debug_dir=config.debug_dir,
            quiet=config.quiet,
        )
        out_dir = write_split(split, config)

        print(colored(f"{m.n_users} users, {m.n_items} items, {m.nnz} interactions", "cyan"))
        if split.protocol == "weak":
            print(colored(f"{len(split.users)} evaluated users, {split.n_negatives} negatives each", "cyan"))
            if split.excluded_users:
                print(colored(f"{split.excluded_users} user(s) with fewer than 2 items kept in train only.", "yellow"))
            if split.shortfall:
                print(colored(f"{len(split.shortfall)} user(s) got fewer negatives than requested.", "yellow"))
        else:
            sizes = ", ".join(f"{name}: {len(g.users)}" for name, g in split.groups.items())
            print(colored(f"{len(split.train_users)} training users; held-out groups {sizes}", "cyan"))
        print_saved(out_dir)
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
