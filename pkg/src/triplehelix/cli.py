"""Command-line entry point: ``triplehelix <subcommand> [flags]``.

Settings resolve as command-line flag, then ``--config`` file (flat
``key=value`` lines, keys named like the long flags), then the
``HELIX_RULES`` environment variable for the rule file, then defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import __version__
from .classifier import DEFAULT_RULES, MATCH_MODES, RuleSet, classification_table
from .corpus import CountryAliases, read_records
from .errors import HelixError, ParseError
from .helix import (
    SliceResolver,
    country_counts,
    helix_report,
    linear_trend,
    read_hits_csv,
    read_rows_csv,
    row_from_cells,
    t_trajectory,
    write_hits_csv,
    write_rows_csv,
    write_trajectory_csv,
    write_trend_csv,
    VennCells,
)
from .infotheory import ContingencyCube, transmission3
from .synth import REGIMES, CorpusSpec, gen_corpus, gen_profiles, gen_series, sci2000_spec
from .systemness import read_series_csv, systemness_test, write_report_csv, write_series_csv

SUBCOMMANDS = ("classify", "report", "countries", "transmission", "systemness", "webtrend", "synth")
TREND_MODEL_FLAGS = {"loglinear": "log_linear", "linear": "linear"}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="input file")
    p.add_argument("--format", help="input format (records: isi; transmission: cube|cells|rows)")
    p.add_argument("--rules", help="rule CSV (tier_index,label,identifier); default $HELIX_RULES")
    p.add_argument("--slice", action="append", help="slice name, repeatable (report)")
    p.add_argument("--aggregates", help="aggregate CSV (aggregate,country)")
    p.add_argument("--aliases", help="country alias CSV (alias,canonical)")
    p.add_argument("--counting", choices=("integer", "fractional"))
    p.add_argument("--match-mode", choices=MATCH_MODES)
    p.add_argument("--include-unidentified", action="store_true", default=None,
                   help="count unidentified records as cell (0,0,0)")
    p.add_argument("--trend-model", choices=tuple(TREND_MODEL_FLAGS))
    p.add_argument("--window", type=int)
    p.add_argument("--alpha", type=float, help="additive smoothing for expected information")
    p.add_argument("--target-year", type=int)
    p.add_argument("--from-year", type=int, help="first year of the trend fit (webtrend)")
    p.add_argument("--subset", action="append", help="comma-joined category list, repeatable")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (a directory for webtrend/synth)")
    p.add_argument("--config", help="key=value config file")
    return p


DEFAULTS = {
    "format": None,
    "counting": "integer",
    "match_mode": "token",
    "include_unidentified": False,
    "trend_model": "loglinear",
    "window": 2,
    "alpha": None,
    "seed": 0,
}
_LIST_KEYS = {"slice", "subset"}
_INT_KEYS = {"window", "target_year", "from_year", "seed"}
_FLOAT_KEYS = {"alpha"}
_BOOL_KEYS = {"include_unidentified"}


def read_config(path) -> dict:
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError("expected key=value", lineno, str(path))
            key = key.strip().replace("-", "_")
            value = value.strip()
            try:
                if key in _LIST_KEYS:
                    out.setdefault(key, []).append(value)
                elif key in _INT_KEYS:
                    out[key] = int(value)
                elif key in _FLOAT_KEYS:
                    out[key] = float(value)
                elif key in _BOOL_KEYS:
                    out[key] = value.lower() in ("1", "true", "yes", "on")
                else:
                    out[key] = value
            except ValueError as exc:
                raise ParseError(f"{key}: {exc}", lineno, str(path)) from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="triplehelix",
        description="Triple Helix indicators: address classification, "
        "three-way transmission, systemness tests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    helps = {
        "classify": "per-label address counts and percentages",
        "report": "indicator rows (number, %% identified, T(uig), cells) per slice",
        "countries": "integer or fractional document counts per country",
        "transmission": "entropies and T(uig) from a cube, cell or row file",
        "systemness": "Markov-versus-trend systemness scores",
        "webtrend": "T(uig) trajectory and linear trend from yearly hit counts",
        "synth": "write synthetic fixtures",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = dict(DEFAULTS)
    if os.environ.get("HELIX_RULES"):
        settings["rules"] = os.environ["HELIX_RULES"]
    if args.config:
        settings.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None:
            settings[key] = value
    ns = argparse.Namespace(**settings)
    for key in ("input", "rules", "aggregates", "aliases", "slice", "subset", "target_year",
                "from_year", "out"):
        if not hasattr(ns, key):
            setattr(ns, key, None)
    if ns.trend_model not in TREND_MODEL_FLAGS:
        raise HelixError(f"trend model must be one of {tuple(TREND_MODEL_FLAGS)}")
    for key in ("input", "rules", "aggregates", "aliases"):
        path = getattr(ns, key)
        if path is not None and not Path(path).is_file():
            raise HelixError(f"--{key}: no such file: {path}")
    return ns


# -- subcommands ----------------------------------------------------------------


def _need_input(cfg):
    if not cfg.input:
        raise HelixError(f"{cfg.command}: --input is required")
    return cfg.input


def _rules(cfg) -> RuleSet:
    return RuleSet.from_csv(cfg.rules) if cfg.rules else DEFAULT_RULES


def _documents(cfg):
    aliases = CountryAliases.from_csv(cfg.aliases) if cfg.aliases else None
    return read_records(_need_input(cfg), format=cfg.format or "isi", aliases=aliases)


def cmd_classify(cfg, out):
    table = classification_table(_documents(cfg), _rules(cfg), cfg.match_mode)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["label", "count", "percent"])
    for label, count, pct in table.rows():
        w.writerow([label, count, f"{pct:.1f}"])
    w.writerow(["Total", table.total, "0.0" if table.undefined else "100.0"])
    if table.undefined:
        print("triplehelix: warning: no addresses; percentages undefined", file=sys.stderr)


def cmd_report(cfg, out):
    docs = _documents(cfg)
    resolver = SliceResolver.from_csv(cfg.aggregates) if cfg.aggregates else SliceResolver()
    rules = _rules(cfg)
    slices = cfg.slice or ["all"]
    rows = [
        helix_report(docs, rules, s, resolver, cfg.include_unidentified, cfg.match_mode)
        for s in slices
    ]
    rows.sort(key=lambda r: r.slice_name)
    write_rows_csv(rows, out)


def cmd_countries(cfg, out):
    counts = country_counts(_documents(cfg), cfg.counting)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["country", "count"])
    for c, v in counts.items():
        w.writerow([c, f"{v:.6f}" if cfg.counting == "fractional" else int(v)])


TRANSMISSION_COLUMNS = (
    "name", "n", "h_u", "h_i", "h_g", "h_ui", "h_ug", "h_ig", "h_uig",
    "t_ui", "t_ug", "t_ig", "t_uig_mbits",
)


def _sniff_transmission_format(path):
    with open(path, newline="", encoding="utf-8") as fh:
        header = set(next(csv.reader(fh), []))
    if {"u", "i", "g", "count"} <= header:
        return "cube"
    if {"univ", "industry", "govern"} <= header:
        return "rows"
    if {"u_only", "i_only", "g_only"} <= header:
        return "cells"
    raise ParseError("cannot tell cube/cells/rows format from header", 1, str(path))


def _read_cube(path):
    cells = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                key = (int(row["u"]), int(row["i"]), int(row["g"]))
                if not set(key) <= {0, 1}:
                    raise ValueError("u,i,g must be 0 or 1")
                if key in cells:
                    raise ValueError(f"duplicate cell {key}")
                cells[key] = float(row["count"])
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), lineno, str(path)) from None
    return ContingencyCube.from_cells(cells)


def _read_cells(path):
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                vals = {k: float(row[k]) for k in VennCells.__dataclass_fields__}
                out.append((row.get("name") or row.get("slice") or f"row{lineno - 1}", VennCells(**vals)))
            except (TypeError, ValueError, KeyError) as exc:
                raise ParseError(str(exc), lineno, str(path)) from None
    return out


def cmd_transmission(cfg, out):
    path = _need_input(cfg)
    fmt = cfg.format or _sniff_transmission_format(path)
    if fmt == "cube":
        named = [(Path(path).stem, _read_cube(path))]
    elif fmt == "cells":
        named = [(n, c.to_cube()) for n, c in _read_cells(path)]
    elif fmt == "rows":
        named = [(n, c.to_cube()) for n, c in read_rows_csv(path)]
    else:
        raise HelixError(f"transmission: unknown format {fmt!r}; expected cube, cells or rows")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRANSMISSION_COLUMNS)
    for name, cube in named:
        try:
            r = transmission3(cube)
        except HelixError as exc:
            raise HelixError(f"{name}: {exc}") from None
        n = int(r.n) if float(r.n).is_integer() else r.n
        w.writerow(
            [name, n]
            + [f"{v:.6f}" for v in (r.h_u, r.h_i, r.h_g, r.h_ui, r.h_ug, r.h_ig, r.h_uig,
                                    r.t_ui, r.t_ug, r.t_ig)]
            + [f"{r.t_uig_mbits:.1f}"]
        )


def cmd_systemness(cfg, out):
    series = read_series_csv(_need_input(cfg))
    target = cfg.target_year if cfg.target_year is not None else series.years[-1]
    subsets = [s.split(",") for s in cfg.subset] if cfg.subset else None
    report = systemness_test(
        series, target, subsets, TREND_MODEL_FLAGS[cfg.trend_model], cfg.window, cfg.alpha
    )
    write_report_csv(report, out)
    if cfg.alpha is not None:
        print(f"triplehelix: smoothing alpha={cfg.alpha}", file=sys.stderr)


def _write_dir(outdir, files: dict[str, str]):
    d = Path(outdir)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text, encoding="utf-8", newline="\n")


def cmd_webtrend(cfg, out):
    hits = read_hits_csv(_need_input(cfg))
    traj = t_trajectory(hits)
    fit = linear_trend(traj, cfg.from_year)
    tbuf, fbuf = io.StringIO(), io.StringIO()
    write_trajectory_csv(traj, tbuf)
    write_trend_csv(fit, fbuf)
    if cfg.out:
        _write_dir(cfg.out, {"trajectory.csv": tbuf.getvalue(), "trend.csv": fbuf.getvalue()})
    else:
        out.write(tbuf.getvalue())
        out.write("\n")
        out.write(fbuf.getvalue())


def _parse_pairs(text, cast=float):
    out = {}
    for item in text.split(","):
        if item.strip():
            k, _, v = item.partition(":")
            out[k.strip()] = cast(v)
    return out


def spec_from_config(settings: dict, seed: int) -> tuple[str, object]:
    """Turn synth config keys into a CorpusSpec or series parameters."""
    kind = settings.get("kind", "corpus")
    if kind == "corpus":
        if settings.get("profile") == "sci2000":
            return kind, sci2000_spec(seed, float(settings.get("scale", 1.0)))
        kw = {}
        if "n_documents" in settings:
            kw["n_documents"] = int(settings["n_documents"])
        else:
            raise HelixError("synth corpus config needs n_documents (or profile=sci2000)")
        if "years" in settings:
            a, _, b = settings["years"].partition("-")
            kw["years"] = (int(a), int(b or a))
        for k in ("p_u", "p_i", "p_g", "rho", "p_international"):
            if k in settings:
                kw[k] = float(settings[k])
        if "coupling" in settings:
            kw["coupling"] = settings["coupling"]
        if "cube" in settings:
            kw["cube_weights"] = {
                tuple(int(ch) for ch in k): v for k, v in _parse_pairs(settings["cube"]).items()
            }
        if "countries" in settings:
            kw["countries"] = _parse_pairs(settings["countries"])
        if "n_without_address" in settings:
            kw["n_without_address"] = int(settings["n_without_address"])
        if "extra_addresses" in settings:
            kw["extra_addresses"] = _parse_pairs(settings["extra_addresses"], int)
        kw["exact"] = str(settings.get("exact", "false")).lower() in ("1", "true", "yes")
        return kind, CorpusSpec(seed=seed, **kw)
    if kind == "series":
        regime = settings.get("regime", "markov_stationary")
        if regime not in REGIMES:
            raise HelixError(f"unknown regime {regime!r}; expected one of {REGIMES}")
        params = {}
        if "years" in settings:
            a, _, b = settings["years"].partition("-")
            params["years"] = (int(a), int(b))
        for k in ("n0", "growth", "t0", "slope"):
            if k in settings:
                params[k] = float(settings[k])
        if "n_categories" in settings:
            params["n_categories"] = int(settings["n_categories"])
        if "noise" in settings:
            params["noise"] = str(settings["noise"]).lower() in ("1", "true", "yes")
        return regime, params
    raise HelixError(f"synth: unknown kind {kind!r}; expected corpus or series")


def cmd_synth(cfg, out):
    if not cfg.out:
        raise HelixError("synth: --out directory is required")
    settings = read_config(cfg.input) if cfg.input else {}
    kind, spec = spec_from_config(settings, cfg.seed)
    files = {}
    if isinstance(spec, CorpusSpec):
        files["corpus.txt"] = gen_corpus(spec)
        cube = gen_profiles(spec).cube
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "i", "g", "count"])
        for (u, i, g), c in sorted(_cube_items(cube)):
            w.writerow([u, i, g, int(c)])
        files["truth_cube.csv"] = buf.getvalue()
    else:
        gen = gen_series(kind, spec, cfg.seed)
        buf = io.StringIO()
        if gen.hits is not None:
            write_hits_csv(gen.hits, buf)
            files["hits.csv"] = buf.getvalue()
            tbuf = io.StringIO()
            w = csv.writer(tbuf, lineterminator="\n")
            w.writerow(["year", "target_t_mbits"])
            for h, t in zip(gen.hits, gen.target_t_mbits):
                w.writerow([h.year, f"{t:.6f}"])
            files["truth_trajectory.csv"] = tbuf.getvalue()
        else:
            write_series_csv(gen.series, buf)
            files["series.csv"] = buf.getvalue()
    _write_dir(cfg.out, files)


def _cube_items(cube):
    for u in (0, 1):
        for i in (0, 1):
            for g in (0, 1):
                yield (u, i, g), cube.counts[u, i, g]


COMMANDS = {
    "classify": cmd_classify,
    "report": cmd_report,
    "countries": cmd_countries,
    "transmission": cmd_transmission,
    "systemness": cmd_systemness,
    "webtrend": cmd_webtrend,
    "synth": cmd_synth,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        cfg = resolve_config(argv)
        buf = io.StringIO()
        COMMANDS[cfg.command](cfg, buf)
        text = buf.getvalue()
        if text:
            if cfg.out and cfg.command not in ("webtrend", "synth"):
                Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
            else:
                stdout.write(text)
    except (HelixError, OSError, ValueError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"triplehelix: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
