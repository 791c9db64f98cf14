"""CSV and structured-text writers. Floats use 17 significant digits."""

import csv
import io
import math

from ..analysis import COLUMNS


def fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def timeseries_csv(record):
    buf = io.StringIO()
    buf.write("# columns: " + ",".join(COLUMNS) + "; floats printed with 17 significant digits\n")
    buf.write(",".join(COLUMNS) + "\n")
    for row in record.rows:
        buf.write(",".join(format(x, ".17g") for x in row) + "\n")
    return buf.getvalue()


def write_timeseries(record, path):
    with open(path, "w", newline="") as fh:
        fh.write(timeseries_csv(record))


def read_timeseries(path):
    """Parse a time-series CSV back into a list of float tuples."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("t,"):
                continue
            rows.append(tuple(float(x) for x in line.strip().split(",")))
    return rows


def report_block(report):
    lines = [
        f"check = {report.check}",
        f"passed = {fmt(report.passed)}",
        f"worst_margin = {fmt(float(report.worst_margin))}",
        f"t_worst = {fmt(float(report.t_worst))}",
        f"tolerance = {fmt(float(report.tolerance))}",
    ]
    for key, value in report.details.items():
        if isinstance(value, (list, tuple)):
            value = "[" + ", ".join(fmt(float(v)) for v in value) + "]"
        elif isinstance(value, (int,)) and not isinstance(value, bool):
            value = str(value)
        lines.append(f"detail.{key} = {fmt(value)}")
    for key, value in report.params.items():
        lines.append(f"param.{key} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def reports_text(reports):
    return "\n".join(report_block(r) for r in reports)


def parse_reports(text):
    """Inverse of ``reports_text``: list of ``{key: raw string}`` dicts."""
    blocks = []
    current = {}
    for line in text.splitlines():
        if not line.strip():
            if current:
                blocks.append(current)
                current = {}
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        current[key] = value
    if current:
        blocks.append(current)
    return blocks


SUMMARY_FIELDS = ("check", "passed", "worst_margin", "t_worst", "tolerance", "chi", "a", "b",
                  "gamma", "mu", "lam", "dim")


def reports_summary_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for r in reports:
        writer.writerow(
            [r.check, fmt(r.passed), fmt(float(r.worst_margin)), fmt(float(r.t_worst)),
             fmt(float(r.tolerance))]
            + [fmt(r.params.get(k)) for k in SUMMARY_FIELDS[5:]]
        )
    return buf.getvalue()
