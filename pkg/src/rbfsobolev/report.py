"""Writing convergence reports as CSV tables, JSON documents and log-log SVG plots."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .experiments import ConvergenceReport

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
SCALAR_COLUMNS = ("level", "n", "q", "h", "rho", "condition", "seed", "jitter", "status")


def report_json(report: ConvergenceReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def read_report_json(path) -> ConvergenceReport:
    return ConvergenceReport.from_dict(json.loads(Path(path).read_text()))


def _sigma_keys(report: ConvergenceReport) -> list[str]:
    keys = [f"{float(s):g}" for s in report.config.get("sigmas", [])]
    return keys


def report_csv_rows(report: ConvergenceReport) -> tuple[list[str], list[list]]:
    sigmas = _sigma_keys(report)
    extras = sorted({k for r in report.rows for k, v in r.items()
                     if k not in SCALAR_COLUMNS and k != "errors" and not isinstance(v, dict)})
    header = list(SCALAR_COLUMNS) + [f"err_sigma={s}" for s in sigmas] + extras
    rows = []
    for r in report.rows:
        errs = r.get("errors", {})
        rows.append([r.get(c, "") for c in SCALAR_COLUMNS] + [errs.get(s, "") for s in sigmas]
                    + [r.get(c, "") for c in extras])
    return header, rows


def _svg_series(report: ConvergenceReport) -> list[tuple[str, list, object]]:
    """(label, [(x, y)], fit) triples for the plot."""
    out = []
    for key in _sigma_keys(report):
        pts = [(r["h"], r["errors"][key]) for r in report.rows
               if r.get("status") == "ok" and isinstance(r["errors"].get(key), float) and r["errors"][key] > 0]
        out.append((f"sigma={key}", pts, report.fits.get(f"sigma={key}")))
    for name, col, var in (("e-ratio", "e_ratio", "h"), ("bernstein", "bernstein_ratio", "q"),
                           ("eigmin", "lambda_min", "q"), ("power", "power_max", "h")):
        pts = [(r[var], r[col]) for r in report.rows
               if r.get("status") == "ok" and isinstance(r.get(col), float) and r[col] > 0]
        if pts:
            out.append((name, pts, report.fits.get(name)))
    return out


def report_svg(report: ConvergenceReport, width: int = 640, height: int = 480) -> str:
    """Static log-log plot: one polyline per series, one dashed line per fitted rate."""
    series = _svg_series(report)
    xs = [math.log10(x) for _, pts, _ in series for x, _ in pts]
    ys = [math.log10(y) for _, pts, _ in series for _, y in pts]
    pad = 60
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return pad + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="13">log10 h (or q)</text>',
        f'<text x="15" y="{height / 2:.1f}" font-size="13" transform="rotate(-90 15 {height / 2:.1f})" '
        f'text-anchor="middle">log10 value</text>',
        f'<text x="{width / 2:.1f}" y="25" text-anchor="middle" font-size="14">'
        f'{_xml(str(report.config.get("name", "")))}: {_xml(str(report.config.get("kernel", "")))}</text>',
    ]
    for i, (label, pts, fit) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        if pts:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            parts.append(f'<polyline class="data" data-label="{_xml(label)}" fill="none" stroke="{color}" '
                         f'stroke-width="2" points="{coords}"/>')
        if fit is not None:
            hx = [min(fit.h), max(fit.h)]
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(hx, fit.predict(hx)))
            parts.append(f'<polyline class="fit" data-label="{_xml(label)}" fill="none" stroke="{color}" '
                         f'stroke-dasharray="6,4" points="{coords}"/>')
            label = f"{label} (slope {fit.slope:.2f})"
        parts.append(f'<text x="{width - pad - 170}" y="{pad + 18 * i}" font-size="12" fill="{color}">'
                     f'{_xml(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def emit_report(report: ConvergenceReport, formats, out_dir, stem: str | None = None) -> list[Path]:
    """Write the report in each requested format; returns the written paths."""
    out_dir = Path(out_dir)
    stem = stem or str(report.config.get("name", "report"))
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for fmt in formats:
            path = out_dir / f"{stem}.{fmt}"
            if fmt == "json":
                path.write_text(report_json(report))
            elif fmt == "csv":
                header, rows = report_csv_rows(report)
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(header)
                    writer.writerows(rows)
            elif fmt == "svg":
                path.write_text(report_svg(report))
            else:
                raise ValueError(f"unknown report format {fmt!r}")
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or out_dir}: {exc.strerror}") from exc
    return written
