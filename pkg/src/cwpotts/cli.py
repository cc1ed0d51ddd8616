"""Command-line front end.

Subcommands: ``lines``, ``slice``, ``classify``, ``oracle`` and
``phase-diagram``. Every command writes CSV, JSON or SVG to ``--out``
(stdout by default) and exits nonzero when its built-in checks fail.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import lines as L
from .bifurcation import (
    ParameterError,
    bifurcation_slice,
    degenerate_locus,
    inside_components,
    maxwell_slice,
)
from .model import ResourceError, exact_conditional_prob, first_layer_expectation, g_of_t, t_of_g
from .regimes import classify, default_workers

SCHEMA_VERSION = 1
RESIDUAL_TOL = 1e-10
ORACLE_TOL = 1e-12
GAP_TOL = 1e-4
LINE_NAMES = tuple(n.lower() for n in L.LINES)


class UsageError(ValueError):
    """Invalid command-line input."""


@dataclass
class RunConfig:
    """Resolved settings of one invocation. Written into every JSON output;
    the worker count and output path do not affect results and are left
    out of that record."""

    command: str
    format: str
    resolution: int
    out: str = "-"
    workers: int = 1
    params: dict = field(default_factory=dict)

    def record(self) -> dict:
        return {"command": self.command, "format": self.format, "resolution": self.resolution, **self.params}


# ---------------------------------------------------------------------------
# formatting


def fmt(v) -> str:
    """17 significant digits; non-finite values as ``inf``/``-inf``/``nan``."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _json(obj, indent: int = 0) -> str:
    """JSON with sorted keys and 17-digit floats; non-finite floats become
    ``null``."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _svg(polylines, box, outline=None, width: int = 600) -> str:
    """Polyline scene. ``box = (xmin, xmax, ymin, ymax)`` in data units."""
    x0, x1, y0, y1 = box
    sx = width / (x1 - x0)
    height = int(round((y1 - y0) * sx))

    def pts(arr):
        return " ".join(f"{fmt((x - x0) * sx)},{fmt((y1 - y) * sx)}" for x, y in arr)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">']
    if outline is not None:
        out.append(f'<polygon points="{pts(outline)}" fill="none" stroke="black" stroke-width="1"/>')
    for name, arr in polylines:
        if len(arr) < 2:
            continue
        out.append(f'<polyline data-name="{name}" points="{pts(arr)}" fill="none" stroke="black" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2], [0.0, 0.0]])


def _planar(bary: np.ndarray) -> np.ndarray:
    """Barycentric ``(N, 3)`` to the plane with vertices (0,0), (1,0),
    (1/2, sqrt3/2) for labels 2, 3, 1."""
    bary = np.asarray(bary, dtype=float)
    return np.column_stack([bary[:, 2] + 0.5 * bary[:, 0], math.sqrt(3) / 2 * bary[:, 0]])


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# argument helpers


def _range(text: str | None, name: str):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--{name} must look like LO:HI, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UsageError(f"--{name} needs finite LO < HI, got {text!r}")
    return lo, hi


def _positive(v: float, name: str) -> float:
    if not (math.isfinite(v) and v > 0):
        raise UsageError(f"--{name} must be positive, got {v}")
    return v


def _g_from(args) -> float:
    if (args.g is None) == (args.t is None):
        raise UsageError("give exactly one of --g and --t")
    if args.g is not None:
        return _positive(args.g, "g")
    return g_of_t(_positive(args.t, "t"))


# ---------------------------------------------------------------------------
# lines


def _line_params(name: str, args) -> tuple[str, np.ndarray]:
    kind, lo, hi = L.line_domain(name)
    given = {"s": args.s_range, "beta": args.beta_range, "g": args.g_range}
    for k, v in given.items():
        if v is not None and k != kind:
            raise UsageError(f"line {name} is parametrised by {kind}, not {k}")
    rng = _range(given[kind], f"{kind}-range")
    if rng is not None:
        lo, hi = rng
    if name == "BE":
        return kind, np.array([lo])
    return kind, np.linspace(lo, hi, args.samples)


def _line_rows(samples):
    keys = []
    for r in samples:
        for k in r.record():
            if k not in keys:
                keys.append(k)
    rows = []
    for r in samples:
        rec = r.record()
        rows.append([rec.get(k, "") for k in keys])
    return keys, rows


def cmd_lines(cfg: RunConfig, args) -> int:
    names = [n.upper() for n in L.LINES] if args.name == "all" else [args.name.upper()]
    if args.name == "all" and any(v is not None for v in (args.s_range, args.beta_range, args.g_range)):
        raise UsageError("ranges apply to a single line, not to --name all")
    results, status = {}, 0
    for name in names:
        kind, params = _line_params(name, args)
        cfg.params.setdefault("parameters", {})[name] = {"kind": kind, "lo": float(params[0]), "hi": float(params[-1])}
        samples, failures = L.evaluate_line(name, params)
        bad = [r for r in samples if not r.residual_norm < RESIDUAL_TOL]
        for p, msg in failures:
            print(f"{name}: no solution at {kind}={fmt(p)}: {msg}", file=sys.stderr)
        for r in bad:
            print(f"{name}: residual {fmt(r.residual_norm)} at beta={fmt(r.beta)}", file=sys.stderr)
        if failures or bad:
            status = 1
        results[name] = samples
    if cfg.format == "csv":
        allrows = [r for name in names for r in results[name]]
        keys, rows = _line_rows(allrows)
        text = _csv(keys, rows)
    elif cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.record(),
            "lines": {
                name: {
                    "beta": [r.beta for r in smp],
                    "g_t": [r.g for r in smp],
                    "records": [r.record() for r in smp],
                }
                for name, smp in results.items()
            },
        }
        if args.name == "all":
            doc["constants"] = L.marked_temperatures()
        text = _json(doc) + "\n"
    else:
        polys = [(n, np.column_stack([[1 / r.beta for r in s], [r.g / r.beta for r in s]])) for n, s in results.items()]
        text = _svg(polys, _phase_box(polys))
    _write(text, cfg.out)
    return status


def _phase_box(polys):
    pts = np.vstack([p for _, p in polys if len(p)] or [np.zeros((1, 2))])
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    x0, x1 = float(pts[:, 0].min()), float(pts[:, 0].max())
    y0, y1 = 0.0, float(pts[:, 1].max())
    pad = 0.05 * max(x1 - x0, 1e-3)
    return x0 - pad, x1 + pad, y0 - pad * (y1 - y0 + 1e-3) / max(x1 - x0, 1e-3), y1 + pad


# ---------------------------------------------------------------------------
# slices


def cmd_slice(cfg: RunConfig, args) -> int:
    g = _g_from(args)
    beta = _positive(args.beta, "beta")
    cfg.params.update(kind=args.kind, beta=beta, g=g)
    curves_out = []
    doc = {"schema_version": SCHEMA_VERSION, "config": cfg.record()}
    if args.kind == "bifurcation":
        locus = degenerate_locus(beta, g, cfg.resolution)
        image = bifurcation_slice(beta, g, cfg.resolution)
        for k, (cm, ca) in enumerate(zip(locus.curves, image.curves)):
            curves_out.append(
                {"id": k, "closed": ca.closed, "m": cm.points, "alpha": ca.points, "inside": ca.inside.tolist()}
            )
        doc["inside_components"] = inside_components(image)
        warnings = image.warnings
    else:
        sl = maxwell_slice(beta, g, cfg.resolution)
        for k, c in enumerate(sl.curves):
            curves_out.append({"id": k, "closed": c.closed, "alpha": c.points, "inside": c.inside.tolist()})
        topo = sl.topology
        doc["topology"] = {
            "label": topo.label,
            "component_count": topo.component_count,
            "cycles": topo.cycles,
            "max_degree": topo.max_degree,
            "axis_fraction": topo.axis_fraction,
            "diagnostics": topo.diagnostics,
        }
        warnings = sl.warnings
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if cfg.format == "json":
        doc["curves"] = [
            {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in c.items()} for c in curves_out
        ]
        text = _json(doc) + "\n"
    elif cfg.format == "csv":
        rows = []
        for c in curves_out:
            for space in ("m", "alpha"):
                if space not in c:
                    continue
                for i, p in enumerate(c[space]):
                    rows.append([c["id"], space, i, *(float(v) for v in p), int(bool(c["inside"][i]))])
        text = _csv(["curve", "space", "index", "c1", "c2", "c3", "inside"], rows)
    else:
        polys = []
        for c in curves_out:
            alpha = np.asarray(c["alpha"])
            inside = np.asarray(c["inside"], dtype=bool)
            # split into inside runs
            start = None
            for i, flag in enumerate(list(inside) + [False]):
                if flag and start is None:
                    start = i
                elif not flag and start is not None:
                    polys.append((f"curve{c['id']}", _planar(alpha[start:i])))
                    start = None
        text = _svg(polys, (-0.05, 1.05, -0.05, math.sqrt(3) / 2 + 0.05), outline=_TRIANGLE)
    _write(text, cfg.out)
    return 0


# ---------------------------------------------------------------------------
# classification


def _t_grid(args, beta):
    if args.t_range is None:
        return None
    lo, hi = _range(args.t_range, "t-range")
    if lo <= 0:
        raise UsageError("--t-range must be positive")
    return np.geomspace(lo, hi, args.n_t)


def cmd_classify(cfg: RunConfig, args) -> int:
    beta = args.beta
    if not 0 < beta < 3:
        raise UsageError(f"--beta must lie in (0, 3), got {beta}")
    grid = _t_grid(args, beta)
    c = classify(beta, grid, cfg.resolution, cfg.workers, check_doubling=not args.no_doubling)
    cfg.params.update(beta=beta, t_grid=c.t_grid.tolist(), doubling=not args.no_doubling)
    if cfg.format == "csv":
        text = _csv(
            ["t", "g_t", "label", "component_count"],
            [[float(t), g_of_t(t), lab, n] for t, lab, n in zip(c.t_grid, c.labels, c.counts)],
        )
    elif cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.record(),
            "regime": c.regime,
            "labels": c.labels,
            "component_counts": c.counts,
            "sequence": c.sequence,
            "expected": c.expected,
            "observed": [{"t_before": a, "t_after": b, "from": x, "to": y} for a, b, x, y in c.observed],
            "predicted": [{"line": n, "t": t, "label": lab} for n, t, lab in c.predicted],
            "matched": [{"line": n, "t": t, "lo": lo, "hi": hi} for n, t, lo, hi in c.matched],
            "doubling": [{"t": t, "count": a, "count_doubled": b} for t, a, b in c.doubling],
            "sequence_ok": c.sequence_ok,
            "transitions_ok": c.transitions_ok,
            "doubling_ok": c.doubling_ok,
        }
        text = _json(doc) + "\n"
    else:
        raise UsageError("classify writes csv or json")
    _write(text, cfg.out)
    if not c.ok:
        print(f"classification check failed for beta={fmt(beta)} ({c.regime})", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# oracle


def _counts(text: str, n: int) -> np.ndarray:
    try:
        counts = np.array([int(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"--counts must be three integers, got {text!r}") from None
    if counts.shape != (3,) or np.any(counts < 0) or counts.sum() != n - 1:
        raise UsageError(f"--counts must be three non-negative integers summing to n-1={n - 1}")
    return counts


def cmd_oracle(cfg: RunConfig, args) -> int:
    n = args.n
    if n < 2:
        raise UsageError("--n must be at least 2")
    beta = args.beta
    if not (math.isfinite(beta) and beta >= 0):
        raise UsageError("--beta must be non-negative")
    g = _g_from(args)
    counts = _counts(args.counts, n) if args.counts else np.array([n - 1, 0, 0])
    if args.eta1 is not None and args.eta1 not in (1, 2, 3):
        raise UsageError("--eta1 must be 1, 2 or 3")
    exact = exact_conditional_prob(n, counts, beta, g).as_array()
    layer = first_layer_expectation(n, counts, beta, g).as_array()
    diff = float(np.max(np.abs(exact - layer)))
    cfg.params.update(n=n, beta=beta, g=g, t=t_of_g(g), counts=counts.tolist(), eta1=args.eta1)
    labels = [args.eta1] if args.eta1 is not None else [1, 2, 3]
    rows = [[a, float(exact[a - 1]), float(layer[a - 1]), float(exact[a - 1] - layer[a - 1])] for a in labels]
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.record(),
            "exact": [r[1] for r in rows],
            "first_layer": [r[2] for r in rows],
            "labels": labels,
            "max_abs_difference": diff,
        }
        text = _json(doc) + "\n"
    elif cfg.format == "csv":
        text = _csv(["eta1", "exact", "first_layer", "difference"], rows)
    else:
        raise UsageError("oracle writes csv or json")
    _write(text, cfg.out)
    return 0 if diff < ORACLE_TOL else 1


# ---------------------------------------------------------------------------
# phase diagram


def cmd_phase_diagram(cfg: RunConfig, args) -> int:
    rng = _range(args.beta_range, "beta-range")
    grid = None if rng is None else np.linspace(rng[0], rng[1], args.samples)
    if grid is not None and (grid[0] <= 0 or grid[-1] > 3):
        raise UsageError("--beta-range must lie in (0, 3]")
    pd = L.phase_diagram(grid, n=args.samples)
    cfg.params.update(samples=args.samples, beta_range=list(rng) if rng else None)
    worst = max((r.residual_norm for smp in pd.samples.values() for r in smp), default=0.0)
    status = 0
    if not worst < RESIDUAL_TOL:
        print(f"residual check failed: {fmt(worst)}", file=sys.stderr)
        status = 1
    for name, fail in pd.failures.items():
        if fail:
            print(f"{name}: {len(fail)} parameter values without solution", file=sys.stderr)
            status = 1
    if max(pd.junction_gaps.values()) >= GAP_TOL:
        print(f"boundary junction gap too large: {pd.junction_gaps}", file=sys.stderr)
        status = 1
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.record(),
            "coordinates": ["1/beta", "g_t/beta"],
            "lines": {k: v.tolist() for k, v in pd.lines.items()},
            "non_gibbs_boundary": {k: v.tolist() for k, v in pd.ng_pieces.items()},
            "constants": pd.marks,
            "junction_gaps": pd.junction_gaps,
        }
        text = _json(doc) + "\n"
    elif cfg.format == "csv":
        rows = [[k, i, float(x), float(y)] for k, v in pd.lines.items() for i, (x, y) in enumerate(v)]
        rows += [
            [f"boundary:{k}", i, float(x), float(y)] for k, v in pd.ng_pieces.items() for i, (x, y) in enumerate(v)
        ]
        text = _csv(["curve", "index", "inv_beta", "g_over_beta"], rows)
    else:
        polys = list(pd.lines.items()) + [(f"boundary:{k}", v) for k, v in pd.ng_pieces.items()]
        text = _svg(polys, _phase_box(polys))
    _write(text, cfg.out)
    return status


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None)
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: $CWPOTTS_WORKERS or 1)")
    common.add_argument("--resolution", type=int, default=200, help="grid cells per simplex edge")

    p = argparse.ArgumentParser(prog="cwpotts", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("lines", parents=[common], help="sample critical lines")
    q.add_argument("--name", type=str.lower, choices=LINE_NAMES + ("all",), default="all")
    q.add_argument("--s-range")
    q.add_argument("--beta-range")
    q.add_argument("--g-range")
    q.add_argument("--samples", type=int, default=200)
    q.set_defaults(func=cmd_lines, default_format="csv")

    q = sub.add_parser("slice", parents=[common], help="bifurcation or Maxwell slice at fixed (beta, g)")
    q.add_argument("--kind", choices=("bifurcation", "maxwell"), default="maxwell")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--g", type=float)
    q.add_argument("--t", type=float)
    q.set_defaults(func=cmd_slice, default_format="json")

    q = sub.add_parser("classify", parents=[common], help="label Maxwell slices along a time sweep")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--t-range", help="LO:HI of a geometric time grid (default: around the predicted transitions)")
    q.add_argument("--n-t", type=int, default=40)
    q.add_argument("--no-doubling", action="store_true", help="skip the resolution-doubling check")
    q.set_defaults(func=cmd_classify, default_format="json")

    q = sub.add_parser("oracle", parents=[common], help="finite-n conditional law, two ways")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--t", type=float)
    q.add_argument("--g", type=float)
    q.add_argument("--counts", help="label counts of sites 2..n as N1,N2,N3 (default: all label 1)")
    q.add_argument("--eta1", type=int, help="report only this label (1..3)")
    q.set_defaults(func=cmd_oracle, default_format="json")

    q = sub.add_parser("phase-diagram", parents=[common], help="all lines and the non-Gibbs boundary")
    q.add_argument("--samples", type=int, default=200)
    q.add_argument("--beta-range", help="LO:HI grid for the lines indexed by beta")
    q.set_defaults(func=cmd_phase_diagram, default_format="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt_ = args.format or args.default_format
    try:
        if args.resolution < 4:
            raise UsageError("--resolution must be at least 4")
        if getattr(args, "samples", 1) < 1 or getattr(args, "n_t", 2) < 2:
            raise UsageError("sample counts must be positive")
        workers = default_workers() if args.workers is None else args.workers
        if workers < 1:
            raise UsageError("--workers must be at least 1")
        cfg = RunConfig(args.command, fmt_, args.resolution, args.out, workers)
        return args.func(cfg, args)
    except (UsageError, ParameterError, ResourceError, ValueError) as exc:
        print(f"cwpotts {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
