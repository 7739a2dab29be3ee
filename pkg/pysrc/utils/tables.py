from typing import Any, List, Sequence

from termcolor import colored

VALUE_WIDTH = 10


def _fmt(value: Any) -> str:
    if value is None:
        return "?"
    if isinstance(value, float):
        return f"{value:.4f}"
    return f"{value}"


def _value_color(value: Any) -> str:
    if value is None:
        return "red"
    return "cyan"


def print_table(label_header: str, columns: Sequence[str], rows: List[Sequence[Any]]) -> None:
    """rows are (label, value, value, ...); labels print blue, values right-aligned."""
    width = max([len(label_header)] + [len(str(row[0])) for row in rows])
    col_width = max([VALUE_WIDTH] + [len(c) for c in columns])
    header = f"{label_header:<{width}}" + "".join(f"  {c:>{col_width}}" for c in columns)
    rule = "-" * len(header)
    print("\n" + colored(header, "green"))
    print(colored(rule, "green"))

    for row in rows:
        label = str(row[0])
        line = colored(label, "blue") + " " * (width - len(label))
        for value in row[1:]:
            line += "  " + colored(f"{_fmt(value):>{col_width}}", _value_color(value))
        print(line)

    print(colored(rule, "green"))
