"""Plain-text rendering of report dictionaries."""
from __future__ import annotations

from typing import Optional


def format_value(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        text = f"{value:.2f}".rstrip("0").rstrip(".")
        return text if text not in ("", "-0") else "0"
    return str(value)


def render_report(title: str, report: dict, order: Optional[list] = None) -> str:
    """Aligned key/value table; nested dicts become indented sub-rows.
    Absent metrics render as '-', never as zero."""
    lines = [title, "=" * len(title)]
    keys = order if order is not None else list(report.keys())
    width = max(len(str(k)) for k in keys)
    for key in keys:
        value = report[key]
        if isinstance(value, dict):
            lines.append(f"{key}:")
            sub_width = max((len(str(k)) for k in value), default=0)
            for sub_key, sub_value in value.items():
                lines.append(f"  {str(sub_key):<{sub_width}}  {format_value(sub_value)}")
        elif isinstance(value, list):
            rendered = ", ".join(str(v) for v in value) if value else "-"
            lines.append(f"{str(key):<{width}}  {rendered}")
        else:
            lines.append(f"{str(key):<{width}}  {format_value(value)}")
    return "\n".join(lines) + "\n"
