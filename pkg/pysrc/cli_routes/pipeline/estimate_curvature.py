import os

from termcolor import colored

from pysrc.errors import EXIT_OK, HyprecError
from pysrc.helpers.curvature.estimate import estimate_c
from pysrc.helpers.pipeline.splits import load_dataset
from pysrc.run_config import build_config
from pysrc.run_stage import run_stage
from pysrc.cli_routes.pipeline.common import print_saved, report_abort, report_failure

CURVATURE_JSON = "curvature.json"


def impl_estimate_curvature(config_path=None, overrides=None, out_path=None) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        config.require("dataset")
        m = run_stage(
            f"Loading {config.dataset}...",
            load_dataset,
            config,
            debug_dir=config.debug_dir,
            quiet=config.quiet,
        )
        print(colored(f"{m.n_users} users, {m.n_items} items, {m.nnz} interactions", "cyan"))

        estimate = estimate_c(
            m.matrix,
            rank=config.rank,
            sample_size=config.sample_size,
            trials=config.delta_trials,
            seed=config.seed,
            embedding=config.embedding,
            raw_delta=config.raw_delta,
            workers=config.workers,
            progress=not config.quiet,
        )
        estimate.config = config.to_dict()
        estimate.config_hash = config.hash()

        path = out_path or os.path.join(config.output_dir, CURVATURE_JSON)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        estimate.write(path)
        if estimate.skipped_trials:
            print(colored(f"Skipped {len(estimate.skipped_trials)} degenerate trial(s).", "yellow"))
        label = "δ (raw)" if config.raw_delta else "δ_rel"
        print(colored(f"{label} = {estimate.delta_rel:.6f}", "cyan"))
        print(colored(f"c = {estimate.c:.6g}", "green"))
        print_saved(path)
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
