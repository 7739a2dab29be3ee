import os

from termcolor import colored

from pysrc.errors import EXIT_OK, DataError, HyprecError
from pysrc.helpers.evalharness.report import EvalReport
from pysrc.helpers.pipeline.boxplots import box_stats, read_trials, reports_frame
from pysrc.run_config import build_config
from pysrc.utils.tables import print_table
from pysrc.cli_routes.pipeline.common import print_saved, report_abort, report_failure

BOXPLOTS_CSV = "boxplots.csv"
REPORTS_CSV = "reports.csv"


def impl_report(paths, config_path=None, overrides=None) -> int:
    config = None
    try:
        config = build_config(config_path, overrides)
        trials = [p for p in paths if p.endswith(".csv")]
        reports = [p for p in paths if p.endswith(".json")]
        other = [p for p in paths if p not in trials and p not in reports]
        if other or not paths:
            raise DataError("report takes trials CSV files and/or evaluation report JSON files.")

        out_dir = os.path.join(config.output_dir, "report")
        os.makedirs(out_dir, exist_ok=True)

        if trials:
            stats = box_stats(read_trials(trials))
            print(colored("Validation metric over tuning trials", "cyan"))
            print_table(
                "Model",
                ["trials", "min", "q1", "median", "q3", "max", "mean"],
                [tuple(row) for row in stats.itertuples(index=False)],
            )
            path = os.path.join(out_dir, BOXPLOTS_CSV)
            stats.to_csv(path, index=False)
            print_saved(path)

        if reports:
            loaded = [EvalReport.read(p) for p in reports]
            for protocol in sorted({r.protocol for r in loaded}):
                group = [r for r in loaded if r.protocol == protocol]
                columns = sorted({c for r in group for c in r.columns()}, key=lambda c: (int(c.split("@")[1]), c))
                print(colored(f"{protocol.capitalize()} generalization", "cyan"))
                print_table("Model", columns, [(r.model,) + tuple(r.metrics.get(c) for c in columns) for r in group])
            path = os.path.join(out_dir, REPORTS_CSV)
            reports_frame(loaded).to_csv(path, index=False)
            print_saved(path)
        return EXIT_OK
    except HyprecError as e:
        return report_failure(e, config)
    except KeyboardInterrupt:
        return report_abort()
