"""
Batch front end: lattices -> matching tables -> d_k -> G_i -> relations ->
kernel certificates, with every artifact listed in a hashed manifest.

Exit status: 0 success, 1 a stage failed, 2 the configuration is invalid.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import entropy_series as es_mod
from .entropy_series import EntropySeries, entropy_series
from .geometry import GeomDensities, format_table, geom_densities
from .highj_kernel import KernelConfig, LemmaReport, lemma_check
from .lattice import FAMILIES, Graph, LatticeSpec, bipartition, read_edge_list, write_edge_list
from .matchings import MatchTable, count_matchings, count_matchings_brute
from .relations import BASES, DegenerateDesign, Observation, RelationModel, fit_relation


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception, manifest: dict):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.manifest = manifest


# ------------------------------------------------------------------ config


def parse_sizes(text: str) -> list[tuple[int, ...]]:
    """'20,22,24' or '6x6,8x8' or '20..60..2' or '4x6..20..2' (range on the last side)."""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." in chunk:
            parts = chunk.split("..")
            if len(parts) not in (2, 3):
                raise ConfigError(f"bad size range {chunk!r}")
            head = parts[0].split("x")
            lo, hi = int(head[-1]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            if step <= 0:
                raise ConfigError(f"range step must be positive in {chunk!r}")
            prefix = tuple(int(x) for x in head[:-1])
            out += [prefix + (v,) for v in range(lo, hi + 1, step)]
        else:
            out.append(tuple(int(x) for x in chunk.split("x")))
    return out


def parse_lattice(text: str) -> tuple[str, list[tuple[int, ...]]]:
    if ":" not in text:
        raise ConfigError(f"lattice must look like FAMILY:SIZES, got {text!r}")
    fam, sizes = text.split(":", 1)
    try:
        return fam, parse_sizes(sizes)
    except ValueError as e:
        raise ConfigError(str(e)) from None


@dataclass
class FamilyConfig:
    label: str
    family: str
    sizes: list[tuple[int, ...]]
    seed: Optional[int] = None
    kmax: int = 6
    p_window: tuple[float, float] = es_mod.DEFAULT_WINDOW
    min_sizes: int = 4
    max_sizes: int = 10
    geometry_size: Optional[tuple[int, ...]] = None

    def specs(self) -> list[LatticeSpec]:
        return [LatticeSpec(self.family, tuple(s), self.seed) for s in self.sizes]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "family": self.family,
            "sizes": [list(s) for s in self.sizes],
            "seed": self.seed,
            "kmax": self.kmax,
            "p_window": list(self.p_window),
            "min_sizes": self.min_sizes,
            "max_sizes": self.max_sizes,
            "geometry_size": None if self.geometry_size is None else list(self.geometry_size),
        }


@dataclass
class PipelineConfig:
    families: list[FamilyConfig] = field(default_factory=list)
    relations: list[int] = field(default_factory=lambda: [2, 3, 4])
    kernel: Optional[KernelConfig] = None
    output_dir: str = "run"
    seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        labels = [f.label for f in self.families]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate family labels in {labels}")
        for f in self.families:
            if f.family not in FAMILIES:
                raise ConfigError(f"unknown lattice family {f.family!r}")
            if not f.sizes:
                raise ConfigError(f"family {f.label!r} has an empty size schedule")
            if f.kmax < 2:
                raise ConfigError(f"family {f.label!r}: kmax must be >= 2")
            lo, hi = f.p_window
            if not 0 <= lo < hi <= 1:
                raise ConfigError(f"family {f.label!r}: bad p-window {f.p_window}")
        for k in self.relations:
            if k not in BASES:
                raise ConfigError(f"relation order {k} outside 2..7")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        return {
            "families": [f.to_dict() for f in self.families],
            "relations": list(self.relations),
            "kernel": None if self.kernel is None else self.kernel.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, d: dict, base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """Fields present in ``d`` override those of ``base``."""
        cfg = base or cls()
        try:
            fams = cfg.families
            if "families" in d:
                fams = []
                for f in d["families"]:
                    sizes = f["sizes"]
                    if isinstance(sizes, str):
                        sizes = parse_sizes(sizes)
                    fams.append(FamilyConfig(
                        f.get("label", f["family"]),
                        f["family"],
                        [tuple(int(x) for x in s) for s in sizes],
                        f.get("seed", d.get("seed", cfg.seed)),
                        int(f.get("kmax", d.get("kmax", 6))),
                        tuple(f.get("p_window", d.get("p_window", es_mod.DEFAULT_WINDOW))),
                        int(f.get("min_sizes", 4)),
                        int(f.get("max_sizes", 10)),
                        None if f.get("geometry_size") is None else tuple(f["geometry_size"]),
                    ))
            kernel = cfg.kernel
            if "kernel" in d:
                kernel = None if d["kernel"] is None else KernelConfig.from_dict(d["kernel"])
            out = cls(
                fams,
                [int(k) for k in d.get("relations", cfg.relations)],
                kernel,
                str(d.get("output_dir", cfg.output_dir)),
                int(d.get("seed", cfg.seed)),
                int(d.get("threads", cfg.threads)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid pipeline config: {e!r}") from None
        out.validate()
        return out


# ------------------------------------------------------------------ bundle


@dataclass
class Bundle:
    tables: dict[str, MatchTable] = field(default_factory=dict)
    series: dict[str, EntropySeries] = field(default_factory=dict)
    geometry: dict[str, GeomDensities] = field(default_factory=dict)
    relations: dict[str, RelationModel] = field(default_factory=dict)
    kernel: Optional[LemmaReport] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tables": {k: json.loads(t.to_json()) for k, t in self.tables.items()},
            "series": {k: s.to_dict() for k, s in self.series.items()},
            "geometry": {k: g.to_dict() for k, g in self.geometry.items()},
            "relations": {k: r.to_dict() for k, r in self.relations.items()},
            "kernel": None if self.kernel is None else self.kernel.to_dict(),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Bundle":
        return cls(
            {k: MatchTable.from_json(json.dumps(v)) for k, v in d["tables"].items()},
            {k: EntropySeries.from_dict(v) for k, v in d["series"].items()},
            {k: GeomDensities.from_dict(v) for k, v in d["geometry"].items()},
            {k: RelationModel.from_dict(v) for k, v in d["relations"].items()},
            None if d["kernel"] is None else LemmaReport.from_dict(d["kernel"]),
            list(d.get("notes", [])),
        )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Run:
    def __init__(self, root: Path):
        self.root = root
        self.artifacts: dict[str, dict] = {}
        root.mkdir(parents=True, exist_ok=True)

    def write(self, stage: str, rel: str, text: str) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        path.write_bytes(data)
        self.artifacts[rel] = {"stage": stage, "sha256": _sha(data), "bytes": len(data)}

    def manifest(self, status: str, failed: Optional[str] = None) -> dict:
        return {
            "status": status,
            "failed_stage": failed,
            "artifacts": dict(sorted(self.artifacts.items())),
        }

    def write_manifest(self, status: str, failed: Optional[str] = None) -> dict:
        m = self.manifest(status, failed)
        (self.root / "manifest.json").write_text(_dumps(m))
        return m


def graph_key(g: Graph) -> str:
    """Content address of a graph: hash of its canonical edge list."""
    body = f"{g.num_vertices} {g.num_edges}\n" + "".join(f"{u} {v}\n" for u, v in g.edges)
    return _sha(body.encode())[:24]


def _count_cached(g: Graph, cache: Path) -> MatchTable:
    path = cache / f"{graph_key(g)}.json"
    if path.exists():
        t = MatchTable.load(path)
        return MatchTable(g.name, t.n, t.counts)
    t = count_matchings(g)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(t.to_json())
    tmp.replace(path)
    return t


def run_pipeline(cfg: PipelineConfig, cache_dir: Optional[Path] = None) -> Bundle:
    """Run every stage, writing artifacts and ``manifest.json`` under cfg.output_dir.

    Matching tables are cached by graph content in ``cache_dir`` (default
    ``<output_dir>/cache``), so deleting downstream artifacts and rerunning
    only redoes the cheap stages.
    """
    cfg.validate()
    run = _Run(Path(cfg.output_dir))
    cache = Path(cache_dir) if cache_dir else run.root / "cache"
    cache.mkdir(parents=True, exist_ok=True)
    bundle = Bundle()
    # where the run lands and how many workers it used do not change results
    hashed = {k: v for k, v in cfg.to_dict().items() if k not in ("output_dir", "threads")}
    run.write("config", "config.json", _dumps(hashed))
    stage = "lattice"
    try:
        graphs: dict[str, list[Graph]] = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for f in cfg.families:
                graphs[f.label] = [s.build() for s in f.specs()]
        for f in cfg.families:
            for g in graphs[f.label]:
                run.write(stage, f"lattices/{f.label}/{g.name}.json",
                          _dumps({"name": g.name, "V": g.num_vertices, "E": g.num_edges,
                                  "r": g.regularity, "key": graph_key(g)}))

        stage = "matchings"
        flat = [(f.label, g) for f in cfg.families for g in graphs[f.label]]
        if cfg.threads > 1 and len(flat) > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
                results = list(ex.map(_count_cached, [g for _, g in flat], [cache] * len(flat)))
        else:
            results = [_count_cached(g, cache) for _, g in flat]
        for (label, g), t in zip(flat, results):
            key = f"{label}/{g.name}"
            bundle.tables[key] = t
            run.write(stage, f"tables/{key}.json", t.to_json() + "\n")

        stage = "entropy"
        for f in cfg.families:
            r = graphs[f.label][0].regularity
            tabs = [bundle.tables[f"{f.label}/{g.name}"] for g in graphs[f.label]]
            try:
                s = entropy_series(tabs, r, f.kmax, f.p_window, f.min_sizes, f.max_sizes)
            except (es_mod.InsufficientData, es_mod.ConditioningError) as e:
                bundle.notes.append(f"entropy {f.label}: {e}")
                continue
            bundle.series[f.label] = s
            run.write(stage, f"entropy/{f.label}.json", s.to_json() + "\n")
            run.write(stage, f"entropy/{f.label}.csv", s.to_csv())

        stage = "geometry"
        bip = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for f in cfg.families:
                if f.geometry_size is not None:
                    g = LatticeSpec(f.family, tuple(f.geometry_size), f.seed).build()
                else:
                    g = graphs[f.label][-1]
                gd = geom_densities(g, f.label)
                bundle.geometry[f.label] = gd
                bip[f.label] = bipartition(g).is_bipartite
                run.write(stage, f"geometry/{f.label}.json", gd.to_json() + "\n")

        stage = "relations"
        by_r: dict[int, list[FamilyConfig]] = {}
        for f in cfg.families:
            if f.label in bundle.series and bip[f.label]:
                by_r.setdefault(bundle.series[f.label].r, []).append(f)
        for r, fams in sorted(by_r.items()):
            for k in cfg.relations:
                usable = [f for f in fams if k <= f.kmax]
                obs = [
                    Observation(f.label, r, bundle.geometry[f.label].vector(),
                                bundle.series[f.label].dk(k), bundle.series[f.label].sigma(k))
                    for f in usable
                ]
                if len(obs) < len(BASES[k]):
                    bundle.notes.append(
                        f"relation r={r} k={k}: {len(obs)} families, basis needs {len(BASES[k])}"
                    )
                    continue
                try:
                    model = fit_relation(k, obs)
                except DegenerateDesign as e:
                    bundle.notes.append(f"relation r={r} k={k}: {e}")
                    continue
                name = f"r{r}_k{k}"
                bundle.relations[name] = model
                run.write(stage, f"relations/{name}.json", model.to_json() + "\n")

        stage = "kernel"
        if cfg.kernel is not None:
            rep = lemma_check(cfg.kernel)
            bundle.kernel = rep
            run.write(stage, "kernel/certificates.json", rep.to_json() + "\n")
            run.write(stage, "kernel/proof_log.txt", rep.proof_log())

        stage = "report"
        run.write(stage, "notes.txt", "".join(n + "\n" for n in bundle.notes))
    except Exception as e:
        raise StageError(stage, e, run.write_manifest("failed", stage)) from e
    run.write_manifest("ok")
    return bundle


# ------------------------------------------------------------------ export


def _series_rows(bundle: Bundle):
    for label, s in sorted(bundle.series.items()):
        for k, d, sig in s.coefficients:
            yield label, s.r, k, d, sig


def export_report(bundle: Bundle, fmt: str, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, text):
        p = out / name
        p.write_text(text)
        written.append(p)

    if fmt == "json":
        put("report.json", _dumps(bundle.to_dict()))
    elif fmt == "csv":
        for label, s in sorted(bundle.series.items()):
            put(f"entropy_{label}.csv", s.to_csv())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "pattern", "count", "n", "density", "exact"])
        for label, gd in sorted(bundle.geometry.items()):
            for e in gd.entries:
                w.writerow([label, e.pattern, e.count, e.n, str(e.density), e.exact])
        put("geometry.csv", buf.getvalue())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["relation", "monomial", "coefficient", "sigma", "residual_norm"])
        for name, m in sorted(bundle.relations.items()):
            for b, c, s in zip(m.to_dict()["basis"], m.coefficients, m.sigmas):
                w.writerow([name, b, repr(c), repr(s), repr(m.residual_norm)])
        put("relations.csv", buf.getvalue())
        if bundle.kernel is not None:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["i", "jq", "degree"])
            for i, d in sorted(bundle.kernel.certificates.items()):
                w.writerow([i, bundle.kernel.config.jq, d])
            put("kernel.csv", buf.getvalue())
    elif fmt == "text":
        put("report.txt", format_text(bundle))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return written


def format_text(bundle: Bundle) -> str:
    lines = []
    if bundle.series:
        lines.append("d_k by family")
        lines.append(f"{'family':<16}{'r':>3}{'k':>4}  {'d_k':>14}  {'sigma':>10}")
        for label, r, k, d, s in _series_rows(bundle):
            lines.append(f"{label:<16}{r:>3}{k:>4}  {d:>14.9f}  {s:>10.2e}")
        lines.append("")
    if bundle.geometry:
        lines.append("pattern densities")
        lines.append(format_table([bundle.geometry[k] for k in sorted(bundle.geometry)]))
        lines.append("")
    for name, m in sorted(bundle.relations.items()):
        lines.append(f"relation {name}: residual norm {m.residual_norm:.3e}, chi2 {m.chi2:.3f}")
        for b, c, s in zip(m.to_dict()["basis"], m.coefficients, m.sigmas):
            lines.append(f"  {b:<8} {c:>14.9f} +- {s:.2e}")
        for row in m.loo:
            lines.append(
                f"  leave out {row['family']}: predicted {row['predicted']:.7f}, "
                f"measured {row['measured']:.7f}, pull {row['pull']:+.2f}"
            )
        lines.append("")
    if bundle.kernel is not None:
        lines.append("kernel certificates")
        lines.append(bundle.kernel.proof_log().rstrip())
    else:
        lines.append("Sq2 violation count: not run")
    for n in bundle.notes:
        lines.append(f"note: {n}")
    return "\n".join(lines) + "\n"


def load_report(path) -> Bundle:
    return Bundle.from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------- CLI


def _graph_from_args(args) -> Graph:
    if getattr(args, "edges", None):
        return read_edge_list(args.edges)
    fam, sizes = parse_lattice(args.lattice)
    if len(sizes) != 1:
        raise ConfigError("give exactly one size for a single lattice")
    return LatticeSpec(fam, sizes[0], args.seed).build()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_lattice(args) -> int:
    g = _graph_from_args(args)
    b = bipartition(g)
    print(f"{g.name}: V={g.num_vertices} E={g.num_edges} r={g.regularity} "
          f"bipartite={b.is_bipartite} girth={g.girth()}")
    if args.out:
        write_edge_list(g, args.out)
    return 0


def cmd_matchings(args) -> int:
    g = _graph_from_args(args)
    t = count_matchings_brute(g) if args.method == "brute" else count_matchings(g)
    _emit(t.to_json() + "\n", args.out)
    return 0


def cmd_entropy(args) -> int:
    tabs = [MatchTable.load(p) for p in args.tables]
    s = entropy_series(tabs, args.r, args.kmax, tuple(args.p_window), args.min_sizes, args.max_sizes)
    _emit(s.to_csv() if args.format == "csv" else s.to_json() + "\n", args.out)
    return 0


def cmd_geometry(args) -> int:
    rows = []
    for spec in args.lattices:
        fam, sizes = parse_lattice(spec)
        for size in sizes:
            g = LatticeSpec(fam, size, args.seed).build()
            rows.append(geom_densities(g, fam))
    if args.format == "json":
        _emit(json.dumps([r.to_dict() for r in rows], indent=1) + "\n", args.out)
    else:
        _emit(format_table(rows) + "\n", args.out)
    return 0


def cmd_relations(args) -> int:
    data = json.loads(Path(args.observations).read_text())
    obs = [
        Observation(
            o["family"], int(o["r"]),
            {key: Fraction(str(o.get(key, 0))) for key in ("G1", "G2", "G3", "G4")},
            float(o["dk"]), float(o["sigma"]), bool(o.get("bipartite", True)),
        )
        for o in data
    ]
    m = fit_relation(args.k, obs)
    _emit(m.to_json() + "\n", args.out)
    return 0


def cmd_kernel(args) -> int:
    lower = args.lower if args.lower is not None else None
    th = None
    if args.lower is not None or args.upper is not None:
        d = KernelConfig(args.mm, args.lL, args.jq, Fraction(args.aQ)).thresholds
        th = (d[0] if lower is None else lower, d[1] if args.upper is None else args.upper)
    cfg = KernelConfig(args.mm, args.lL, args.jq, Fraction(args.aQ), th, args.u_mode)
    rep = lemma_check(cfg)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "certificates.json").write_text(rep.to_json() + "\n")
        (out / "proof_log.txt").write_text(rep.proof_log())
    sys.stdout.write(rep.proof_log())
    return 0


def cmd_pipeline(args) -> int:
    base = PipelineConfig(
        [],
        [int(k) for k in args.relations.split(",")] if args.relations else [2, 3, 4],
        KernelConfig() if args.kernel else None,
        args.out,
        args.seed,
        args.threads,
    )
    for i, spec in enumerate(args.lattice or []):
        fam, sizes = parse_lattice(spec)
        base.families.append(FamilyConfig(
            f"{fam}_{i}", fam, sizes, args.seed, args.kmax, tuple(args.p_window),
            args.min_sizes, args.max_sizes,
        ))
    cfg = base
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        cfg = PipelineConfig.from_dict(d, base)
    cfg.validate()
    bundle = run_pipeline(cfg)
    for fmt in args.format:
        export_report(bundle, fmt, Path(cfg.output_dir) / "report")
    print(f"run written to {cfg.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerseries", description=__doc__.strip().splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel stages")
    sub = p.add_subparsers(dest="command", required=True)

    def lattice_args(sp):
        sp.add_argument("lattice", nargs="?", help="FAMILY:SIZE, e.g. hypercubic_torus:6x6")
        sp.add_argument("--edges", help="read the graph from an edge-list file instead")
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("lattice", help="build a lattice and write its edge list")
    lattice_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("matchings", help="exact j-matching table as JSON")
    lattice_args(sp)
    sp.add_argument("--method", choices=("dp", "brute"), default="dp")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_matchings)

    sp = sub.add_parser("entropy", help="fit d_k from matching tables of one family")
    sp.add_argument("tables", nargs="+")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--kmax", type=int, default=6)
    sp.add_argument("--p-window", type=float, nargs=2, default=list(es_mod.DEFAULT_WINDOW))
    sp.add_argument("--min-sizes", type=int, default=4)
    sp.add_argument("--max-sizes", type=int, default=10)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("geometry", help="pattern densities G1..G4")
    sp.add_argument("lattices", nargs="+", help="FAMILY:SIZES entries")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_geometry)

    sp = sub.add_parser("relations", help="fit d_k against pattern densities")
    sp.add_argument("k", type=int)
    sp.add_argument("observations", help="JSON list of {family, r, G1..G4, dk, sigma, bipartite}")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_relations)

    sp = sub.add_parser("kernel", help="degree certificates and threshold check")
    sp.add_argument("--mm", type=int, default=10)
    sp.add_argument("--lL", type=int, default=3)
    sp.add_argument("--jq", type=int, default=2)
    sp.add_argument("--aQ", default="0")
    sp.add_argument("--lower", type=float, default=None)
    sp.add_argument("--upper", type=float, default=None)
    sp.add_argument("--u-mode", choices=("listing", "formal"), default="listing")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("pipeline", help="run every stage into one directory")
    sp.add_argument("--config", help="JSON file; its fields override the flags")
    sp.add_argument("--lattice", action="append", help="FAMILY:SIZES, repeatable")
    sp.add_argument("--kmax", type=int, default=6)
    sp.add_argument("--p-window", type=float, nargs=2, default=list(es_mod.DEFAULT_WINDOW))
    sp.add_argument("--min-sizes", type=int, default=4)
    sp.add_argument("--max-sizes", type=int, default=10)
    sp.add_argument("--relations", help="comma-separated orders, default 2,3,4")
    sp.add_argument("--kernel", action="store_true", help="also run the kernel check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="run")
    sp.add_argument("--format", nargs="*", choices=("json", "csv", "text"), default=["json", "text"])
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # every other failure is a stage failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
