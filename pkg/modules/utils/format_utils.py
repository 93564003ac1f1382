"""
format_utils.py - Formatting utilities for mtppower

This module provides utilities for rendering result tables in a readable way.

Changes:
- Initial implementation of the format_utils module
- format_table renders rows under a +---+ box layout with column truncation
- Numbers are right-aligned and printed with a fixed number of decimals
- Added format_error for uniform error lines
"""


def format_value(value, digits=3):
    """
    Render one cell.

    Args:
        value: Cell value (None, bool, int, float or anything printable)
        digits (int): Decimals for floats

    Returns:
        str: Cell text ("-" for None)
    """
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    try:
        number = float(value)
    except (TypeError, ValueError):
        return str(value)
    if number != number:
        return "nan"
    if isinstance(value, str):
        return value
    if number != 0 and abs(number) < 10 ** -digits:
        return f"{number:.{max(digits - 1, 1)}e}"
    return f"{number:.{digits}f}"


def _is_numeric(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def format_table(columns, rows, digits=3, max_column_width=40, max_rows=None, title=None):
    """
    Format rows as a boxed text table.

    Args:
        columns (list): Column headers
        rows (list): Row sequences, one value per column
        digits (int): Decimals for float cells
        max_column_width (int): Maximum width for columns before truncation
        max_rows (int, optional): Maximum number of rows to display
        title (str, optional): Line printed above the table

    Returns:
        str: Formatted table
    """
    if not rows:
        return "No rows"

    show_truncated = False
    total = len(rows)
    if max_rows is not None and total > max_rows:
        rows = rows[:max_rows]
        show_truncated = True

    formatted_rows = []
    for row in rows:
        cells = []
        for val in row:
            text = format_value(val, digits)
            if len(text) > max_column_width:
                text = text[:max_column_width - 3] + "..."
            cells.append(text)
        formatted_rows.append(cells)

    col_widths = []
    for i, col in enumerate(columns):
        width = len(str(col))
        for row in formatted_rows:
            if i < len(row):
                width = max(width, len(row[i]))
        col_widths.append(min(width, max_column_width) + 2)

    def render(cells, header=False):
        parts = []
        for text, width in zip(cells, col_widths):
            if not header and _is_numeric(text):
                parts.append(text.rjust(width - 2))
            else:
                parts.append(str(text).ljust(width - 2))
        return "| " + " | ".join(parts) + " |"

    separator = "+" + "+".join("-" * width for width in col_widths) + "+"
    lines = [separator, render([str(c) for c in columns], header=True), separator]
    lines += [render(row) for row in formatted_rows]
    lines.append(separator)
    if title:
        lines.insert(0, title)
    if show_truncated:
        lines.append(f"Showing {max_rows} of {total} rows.")
    return "\n".join(lines)


def format_error(error_msg):
    """
    Format an error message for display.

    Args:
        error_msg (str): The error message

    Returns:
        str: Formatted error message
    """
    return f"ERROR: {error_msg}"
