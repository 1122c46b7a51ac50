"""CSV and JSON emission of diagnostic series.

Values are written with 17 significant digits, enough for an exact double
round trip. Every CSV gets a sibling ``.json`` file describing the run.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

from . import __version__
from .hypocoercivity import perturbation_weight, theoretical_gamma
from .core import eps0
from .series import DiagnosticSeries


def _fmt(x: float) -> str:
    return format(x, ".17g")


def metadata_for(config: dict | None = None, *, alpha=None, bigA=None, eps=None, grid=None,
                 extra: dict | None = None) -> dict:
    """Self-description of a run: config, version, grid and derived constants."""
    cfg = dict(config or {})
    alpha = cfg.get("alpha") if alpha is None else alpha
    bigA = cfg.get("A") if bigA is None else bigA
    eps = cfg.get("eps") if eps is None else eps
    meta = {"code_version": __version__, "config": cfg}
    if grid is not None:
        meta["grid"] = grid
    elif "n" in cfg:
        meta["grid"] = {"n": cfg["n"], "nv": cfg.get("nv"), "vmax": cfg.get("vmax")}
    if alpha is not None and bigA is not None and bigA > 1:
        meta["theoretical_gamma"] = theoretical_gamma(alpha, bigA)
        meta["eps0"] = eps0(alpha, bigA)
        if eps is not None:
            meta["delta"] = perturbation_weight(eps, alpha, bigA)
    if extra:
        meta.update(extra)
    return meta


def emit_series(series: DiagnosticSeries, path, metadata: dict | None = None) -> Path:
    """Write ``series`` as CSV (``t`` first) and ``metadata`` as sibling JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            names = series.names
            w.writerow(["t", *names])
            cols = [series[name] for name in names]
            for k, t in enumerate(series.t):
                w.writerow([_fmt(t), *(_fmt(float(c[k])) for c in cols)])
        with open(path.with_suffix(".json"), "w", encoding="utf-8") as fh:
            json.dump(metadata or {"code_version": __version__}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_series(path) -> DiagnosticSeries:
    """Inverse of :func:`emit_series`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["t"]:
        raise ValueError(f"{path}: not a diagnostics CSV (first header must be 't')")
    names = rows[0][1:]
    out = DiagnosticSeries(names)
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(names) + 1:
            raise ValueError(f"{path}: row {k} has {len(row)} fields, expected {len(names) + 1}")
        out.append(float(row[0]), **{n: float(v) for n, v in zip(names, row[1:])})
    return out


def default_out_dir(arg=None) -> Path:
    """``--out`` if given, else ``$KINLAB_OUT``, else ``./kinlab_out``."""
    if arg:
        return Path(arg)
    return Path(os.environ.get("KINLAB_OUT") or "kinlab_out")
