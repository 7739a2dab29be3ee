import os
import threading
import time
import traceback
from typing import Any, Callable, Optional

from termcolor import colored

from pysrc.errors import HyprecError


def _spinner_line(prompt: str):
    stop = threading.Event()

    def spinner():
        frames = "|/-\\"
        i = 0
        while not stop.is_set():
            print(f"\r{prompt} {frames[i % len(frames)]}", end="", flush=True)
            time.sleep(0.1)
            i += 1

    t = threading.Thread(target=spinner, daemon=True)
    return stop, t


def write_debug_error(debug_dir: Optional[str], text: str) -> None:
    if not debug_dir:
        return
    try:
        os.makedirs(debug_dir, exist_ok=True)
        with open(os.path.join(debug_dir, "error.txt"), "w", encoding="utf-8") as f:
            f.write(text)
    except OSError:
        pass


def run_stage(
    prompt: str,
    fn: Callable[..., Any],
    *args: Any,
    debug_dir: Optional[str] = None,
    quiet: bool = False,
    **kwargs: Any,
) -> Any:
    """
    Runs one blocking pipeline stage behind a spinner line.

    Args:
        prompt: text shown while spinning
        fn: the stage; its return value is passed through
        debug_dir: where error.txt is written when the stage fails, e.g. ".hyprec/debug"
        quiet: skip the spinner and the status line

    Raises:
        whatever fn raises, after the line is finished with "failed"
    """
    if quiet:
        try:
            return fn(*args, **kwargs)
        except HyprecError as e:
            write_debug_error(debug_dir, f"{type(e).__name__}: {e}\n")
            raise

    stop, t = _spinner_line(prompt)
    t.start()
    try:
        result = fn(*args, **kwargs)
    except BaseException as e:
        stop.set()
        t.join()
        print(f"\r{prompt} " + colored("failed", "red"))
        if not isinstance(e, KeyboardInterrupt):
            write_debug_error(debug_dir, traceback.format_exc())
        raise
    stop.set()
    t.join()
    print(f"\r{prompt} " + colored("success", "green"))
    return result
