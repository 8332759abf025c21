"""Command-line front end: analyze | shadow | horseshoe | census | entropy.

Configuration is an INI file with a [map] section and one section per
command.  Every resolved parameter is echoed in the output record, and the
same config and seed always give byte-identical output.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import census as cen
from . import cocycle as coc
from . import horseshoe as hs
from . import shadow as sh
from .errors import ConfigError, HypShadowError
from .mapmodel import MapModel, map_from_config, window_from_orbit

DEFAULTS = {
    "map": {"matrix": "3 1; 1 1", "epsilon": "0.0"},
    "run": {"seed": "0"},
    "analyze": {"eta": "0.1", "n_iters": "10000", "window": "200", "samples": "16", "sample_length": "600"},
    "shadow": {"eta": "0.1", "pseudo_orbit": "", "kappa_fraction": "0.5", "n_iters": "10000", "certify": "yes"},
    "horseshoe": {f.name: "" if f.default is None else str(f.default) for f in fields(hs.HorseshoeParams)}
    | {"word_length_cap": "3"},
    "census": {
        "n_max": "8",
        "grid_density": "200",
        "tol": "1e-10",
        "K_grid": "0.9 0.5 0.1",
        "a_grid": "0.5 0.3 0.1 0.05",
    },
    "entropy": {"horseshoe": "yes"},
}
COMMANDS = ("analyze", "shadow", "horseshoe", "census", "entropy")


# -- configuration -----------------------------------------------------------


class RunConfig:
    """Resolved configuration: defaults overlaid with the file and flags."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        self.sections = sections

    @classmethod
    def load(cls, path: str | None, seed: int | None = None) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        parser.read_dict(DEFAULTS)
        if path:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                user = configparser.ConfigParser(interpolation=None)
                user.optionxform = str
                user.read(p)
            except configparser.Error as exc:
                raise ConfigError(f"cannot parse config: {exc}") from exc
            for sec in user.sections():
                if sec not in DEFAULTS:
                    raise ConfigError(f"unknown section [{sec}]")
                for key, val in user.items(sec):
                    if key not in DEFAULTS[sec] and not (sec == "map" and key in ("builtin", "name", "dimension")):
                        raise ConfigError(f"unknown key {key!r} in [{sec}]")
                    parser.set(sec, key, val)
        if seed is not None:
            parser.set("run", "seed", str(seed))
        return cls({s: dict(parser.items(s)) for s in parser.sections()})

    def get(self, sec: str, key: str, kind=str):
        raw = self.sections[sec][key]
        try:
            if kind is bool:
                low = raw.strip().lower()
                if low not in ("yes", "no", "true", "false", "1", "0", "on", "off"):
                    raise ValueError(raw)
                return low in ("yes", "true", "1", "on")
            if kind == "floats":
                return tuple(float(v) for v in raw.replace(",", " ").split())
            if kind is int:
                return int(raw)
            return kind(raw)
        except ValueError as exc:
            raise ConfigError(f"[{sec}] {key} = {raw!r} is not a valid {getattr(kind, '__name__', kind)}") from exc

    @property
    def seed(self) -> int:
        return self.get("run", "seed", int)

    def fmap(self) -> MapModel:
        return map_from_config(self.sections["map"])

    def echo(self, *secs: str) -> dict:
        return {s: dict(sorted(self.sections[s].items())) for s in ("map", "run") + secs}


# -- output helpers ----------------------------------------------------------


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(record: dict) -> str:
    return json.dumps(clean(record), sort_keys=True, indent=2) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        return " ".join(_fmt(x) for x in v)
    return "" if v is None else str(v)


def to_table(record: dict) -> str:
    """Aligned key/value lines; a census TSV block is rendered as columns."""
    rec = clean(record)
    tsv = rec.pop("table_tsv", None)
    items = list(_flatten(rec))
    width = max((len(k) for k, _ in items), default=0)
    lines = [f"{k.ljust(width)}  {_fmt(v)}" for k, v in items]
    if tsv:
        rows = [r.split("\t") for r in tsv.strip().splitlines()]
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines.append("")
        lines.extend("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> dict:
    """Inverse of the key/value part of ``to_table`` (values kept as strings)."""
    out = {}
    for line in text.splitlines():
        if not line.strip():
            break
        key, _, val = line.partition("  ")
        out[key.strip()] = val.strip()
    return out


# -- commands ----------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, plot_dir: Path | None = None, workers: int = 1) -> dict:
    fmap = cfg.fmap()
    rng = np.random.default_rng(cfg.seed)
    eta = cfg.get("analyze", "eta", float)
    x0 = rng.random(fmap.dimension)
    spec = coc.lyapunov_exponents(fmap, x0, cfg.get("analyze", "n_iters", int))
    rec = {
        "command": "analyze",
        "config": cfg.echo("analyze"),
        "map": {"degree": fmap.degree, "epsilon": fmap.epsilon, "matrix": fmap.matrix.tolist()},
        "spectrum": spec.to_dict(),
    }
    if not spec.hyperbolic or spec.lam is None or eta >= spec.lam:
        rec["charts"] = None
        rec["note"] = "spectrum not hyperbolic (or eta >= lambda): no charts"
        return rec
    W = cfg.get("analyze", "window", int)
    orbit = fmap.iterate(x0, 2 * W + 200)[100:]
    w = window_from_orbit(orbit, W, W)
    cw = coc.cocycle_window(fmap, w)
    frame = coc.oseledec_splitting(cw, spec.unstable_dim)
    forms = coc.lyapunov_inner_product(cw, frame, spec.lam, eta)
    chart = coc.coordinate_change(forms, frame, cw, eta)
    xi = coc.chart_radius(chart, fmap.holder)
    center = -chart.offset
    n_s, L = cfg.get("analyze", "samples", int), cfg.get("analyze", "sample_length", int)
    starts = rng.random((n_s, fmap.dimension))
    orbits = np.swapaxes(fmap.iterate(starts, L + 99)[100:], 0, 1)
    norms, ok = coc.chart_norms_batch(fmap, orbits, spec, eta)
    good = norms[ok]
    rec["splitting"] = {
        "min_angle": float(frame.angles.min()),
        "invariance_residual": frame.residual,
        "window_radius": W,
    }
    rec["charts"] = {
        "K_window": chart.K,
        "K_center": float(chart.norms[center]),
        "xi_center": float(xi[center]),
        "valid_range": [int(chart.offset), int(chart.offset + len(chart) - 1)],
        "eta": eta,
    }
    rec["block"] = {
        "samples": int(good.size),
        "K_median": float(np.median(good)) if good.size else None,
        "K_q90": float(np.quantile(good, 0.9)) if good.size else None,
        "K_max": float(good.max()) if good.size else None,
    }
    if plot_dir is not None:
        idx = np.arange(len(chart)) + chart.offset
        from .plotting import plot_chart_norms

        rec["plots"] = [p.name for p in plot_chart_norms(plot_dir, idx, chart.norms, rec["block"]["K_q90"])]
    return rec


def _spectrum(cfg: RunConfig, fmap: MapModel, sec: str) -> coc.LyapunovSpectrum:
    rng = np.random.default_rng(cfg.seed)
    return coc.lyapunov_exponents(fmap, rng.random(fmap.dimension), cfg.get(sec, "n_iters", int))


def cmd_shadow(cfg: RunConfig, pseudo_path: str | None = None, plot_dir: Path | None = None, workers: int = 1) -> dict:
    fmap = cfg.fmap()
    path = pseudo_path or cfg.get("shadow", "pseudo_orbit")
    if not path:
        raise ConfigError("shadow needs a pseudo-orbit file (--pseudo or [shadow] pseudo_orbit)")
    try:
        pseudo = sh.PseudoOrbit.from_text(Path(path).read_text())
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read pseudo-orbit {path}: {exc}") from exc
    if pseudo.points.shape[1] != fmap.dimension:
        raise ConfigError("pseudo-orbit dimension does not match the map")
    eta = cfg.get("shadow", "eta", float)
    spec = _spectrum(cfg, fmap, "shadow")
    charts = sh.chart_pseudo_orbit(fmap, pseudo, spec, eta)
    res = sh.shadow_pseudo_orbit(
        fmap,
        pseudo,
        charts,
        cfg.get("shadow", "kappa_fraction", float),
        certify=cfg.get("shadow", "certify", bool),
    )
    jumps = pseudo.jump_indices()
    rec = {
        "command": "shadow",
        "config": cfg.echo("shadow"),
        "spectrum": spec.to_dict(),
        "certificate": res.to_dict(),
        "jump_indices": jumps.tolist(),
        "residual_table": [[int(i), float(r)] for i, r in enumerate(res.residuals)],
        "points": res.points.tolist(),
    }
    if plot_dir is not None:
        from .plotting import plot_shadow_distances

        rec["plots"] = [p.name for p in plot_shadow_distances(plot_dir, res.distances, jumps)]
    return rec


def horseshoe_params(cfg: RunConfig) -> hs.HorseshoeParams:
    kw = {}
    for f in fields(hs.HorseshoeParams):
        raw = cfg.sections["horseshoe"][f.name]
        if raw == "":
            continue
        kind = int if f.type in ("int", "int | None") else float
        kw[f.name] = cfg.get("horseshoe", f.name, kind)
    if cfg.sections["run"].get("seed") is not None:
        kw["seed"] = cfg.seed
    return hs.HorseshoeParams(**kw)


def cmd_horseshoe(cfg: RunConfig, plot_dir: Path | None = None, workers: int = 1) -> dict:
    fmap = cfg.fmap()
    params = horseshoe_params(cfg)
    res = hs.construct_horseshoe(fmap, params, cfg.get("horseshoe", "word_length_cap", int), workers)
    rec = {"command": "horseshoe", "config": cfg.echo("horseshoe"), "horseshoe": res.to_dict()}
    if plot_dir is not None:
        from .plotting import plot_horseshoe

        rec["plots"] = [p.name for p in plot_horseshoe(plot_dir, res.alphabet.points, res.orbits, res.alphabet.center, res.eps2)]
    return rec, res


def _census(cfg: RunConfig, fmap: MapModel, workers: int) -> cen.CensusTable:
    return cen.build_census(
        fmap,
        cfg.get("census", "n_max", int),
        cfg.get("census", "grid_density", int),
        cfg.get("census", "tol", float),
        cfg.get("census", "K_grid", "floats"),
        cfg.get("census", "a_grid", "floats"),
        workers,
    )


def cmd_census(cfg: RunConfig, plot_dir: Path | None = None, workers: int = 1) -> dict:
    fmap = cfg.fmap()
    table = _census(cfg, fmap, workers)
    growth = cen.growth_rate(table)
    rec = {
        "command": "census",
        "config": cfg.echo("census"),
        "census": table.to_dict(),
        "growth": {"sequence": growth.sequence, "max_tail_estimate": growth.max_tail_estimate},
        "degree_check": cen.degree_check(fmap, table).to_dict(),
        "table_tsv": table.to_tsv(),
    }
    if plot_dir is not None:
        from .plotting import plot_growth

        n = [r.n for r in table.rows]
        rec["plots"] = [p.name for p in plot_growth(plot_dir, n, growth.sequence, math.log(max(fmap.degree, 1)))]
    return rec


def cmd_entropy(cfg: RunConfig, plot_dir: Path | None = None, workers: int = 1) -> dict:
    fmap = cfg.fmap()
    table = _census(cfg, fmap, workers)
    results, hs_rec = [], None
    if cfg.get("entropy", "horseshoe", bool):
        res, err = hs.safe_construct(fmap, horseshoe_params(cfg), cfg.get("horseshoe", "word_length_cap", int), workers)
        if res is not None:
            results.append(res)
            hs_rec = {"N": res.coding.N, "l": res.coding.l, "entropy_lower_bound": res.entropy_lower_bound}
        else:
            hs_rec = {"error": type(err).__name__, "message": str(err)}
    est = cen.hyperbolic_entropy_estimate(fmap, results, table)
    growth = cen.growth_rate(table)
    rec = {
        "command": "entropy",
        "config": cfg.echo("census", "horseshoe", "entropy"),
        "estimate": est.to_dict(),
        "horseshoe": hs_rec,
        "growth_tail": growth.max_tail_estimate,
        "log_degree": math.log(fmap.degree) if fmap.degree > 0 else None,
        "degree_check": cen.degree_check(fmap, table).to_dict(),
    }
    if plot_dir is not None:
        from .plotting import plot_growth

        n = [r.n for r in table.rows]
        ld = math.log(fmap.degree) if fmap.degree > 0 else None
        rec["plots"] = [p.name for p in plot_growth(plot_dir, n, growth.sequence, ld, est.sweep)]
    return rec


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypshadow", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="INI config file")
    ap.add_argument("--seed", type=int, help="RNG seed (overrides [run] seed)")
    ap.add_argument("--out", help="write the record here instead of stdout")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--plot-dir", help="also render PNG figures and plot-data files here")
    ap.add_argument("--pseudo", help="pseudo-orbit file for the shadow command")
    return ap


def run(argv=None) -> tuple[int, str]:
    args = build_parser().parse_args(argv)
    plot_dir = Path(args.plot_dir) if args.plot_dir else None
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = RunConfig.load(args.config, args.seed)
        if args.command == "analyze":
            rec = cmd_analyze(cfg, plot_dir, args.workers)
        elif args.command == "shadow":
            rec = cmd_shadow(cfg, args.pseudo, plot_dir, args.workers)
        elif args.command == "horseshoe":
            rec = cmd_horseshoe(cfg, plot_dir, args.workers)[0]
        elif args.command == "census":
            rec = cmd_census(cfg, plot_dir, args.workers)
        else:
            rec = cmd_entropy(cfg, plot_dir, args.workers)
        code = 0
    except ConfigError as exc:
        rec, code = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}, 2
    except HypShadowError as exc:
        rec, code = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}, 3
    text = to_table(rec) if args.format == "table" else to_json(rec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code, text


def main(argv=None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
