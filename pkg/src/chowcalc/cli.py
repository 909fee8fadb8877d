"""
Command-line front end.

    chowcalc hasse    --type E7 --parabolic P7 --format dot
    chowcalc multiply --type E7 --parabolic P7 g_{5,1} g_{9,1}
    chowcalc preimage --type F4 --parabolic P1 g_{2,1} --dump-system
    chowcalc cfunc    --type F4 --parabolic P1 "w[1]^2"
    chowcalc table    --type E6 --parabolic P1 --format json
    chowcalc cache    status

Artifacts go to standard output (or ``--output``); progress lines go to
standard error.  The cache directory is ``--cache-dir``, else the
``CHOWCALC_CACHE_DIR`` environment variable, else ``~/.cache/chowcalc``.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .cache import Cache, atomic_write_text, default_cache_dir, frac_to_str
from .chowring import ChowRing, dump_json
from .polyops import c_map, format_polynomial, parse_polynomial
from .preimage import build_system
from .rootdata import DynkinSpec

COMMANDS = ("hasse", "multiply", "preimage", "cfunc", "table", "cache")


class CliError(Exception):
    pass


@dataclass
class JobConfig:
    """Everything a subcommand needs, resolved from the command line."""

    command: str
    spec: DynkinSpec | None
    parabolic: str | None
    variant: str
    cache_dir: Path | None
    threads: int
    fmt: str
    output: Path | None
    quiet: bool

    @classmethod
    def from_args(cls, args) -> "JobConfig":
        spec = DynkinSpec.parse(args.type) if getattr(args, "type", None) else None
        if args.no_cache:
            cache_dir = None
        else:
            cache_dir = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
        if args.threads < 1:
            raise CliError("--threads must be at least 1")
        return cls(args.command, spec, args.parabolic, args.variant, cache_dir, args.threads,
                   args.format, Path(args.output) if args.output else None, args.quiet)

    def cache(self):
        return Cache(self.cache_dir) if self.cache_dir is not None else None

    def ring(self, reduce: bool = False) -> ChowRing:
        if self.spec is None:
            raise CliError("--type is required for this command")
        return ChowRing(self.spec, self.parabolic, variant=self.variant, reduce=reduce,
                        cache=self.cache(), progress=self.progress)

    def progress(self, msg: str):
        if not self.quiet:
            print(f"[chowcalc] {msg}", file=sys.stderr, flush=True)


def _common(p):
    p.add_argument("--type", "-t", help="Dynkin type such as A2, F4, E8")
    p.add_argument("--parabolic", "-p", default=None,
                   help="omitted simple roots: P7, 1,3 or B (Borel; the default)")
    p.add_argument("--variant", choices=("invariance", "delta"), default="invariance",
                   help="constraint family for preimages")
    p.add_argument("--cache-dir", default=None, help="cache directory (overrides CHOWCALC_CACHE_DIR)")
    p.add_argument("--no-cache", action="store_true", help="do not read or write the cache")
    p.add_argument("--threads", type=int, default=1, help="worker threads for table fills")
    p.add_argument("--format", "-f", choices=("json", "text", "dot"), default="text")
    p.add_argument("--output", "-o", default=None, help="write the artifact here instead of stdout")
    p.add_argument("--quiet", "-q", action="store_true", help="no progress lines on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chowcalc", description="Chow rings of G/P in exact arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hasse", help="Hasse diagram or weighted Pieri graph")
    _common(p)
    p.add_argument("--skeleton", action="store_true", help="unweighted Hasse skeleton")
    p.add_argument("--letter", type=int, default=None, help="hyperplane class h_a for non-maximal parabolics")

    p = sub.add_parser("multiply", help="product of two classes")
    _common(p)
    p.add_argument("left", help="g_{i,j} label or a word such as [7,6]")
    p.add_argument("right")
    p.add_argument("--route", default="auto",
                   choices=("auto", "pieri", "duality", "leibniz", "polynomial", "generators"))

    p = sub.add_parser("preimage", help="polynomial whose c-image is a class")
    _common(p)
    p.add_argument("cls", metavar="class")
    p.add_argument("--dump-system", action="store_true", help="print the linear system before solving")
    p.add_argument("--no-reduce", action="store_true", help="skip the Groebner normal form")

    p = sub.add_parser("cfunc", help="apply c to a polynomial in w[1..l]")
    _common(p)
    p.add_argument("polynomial")

    p = sub.add_parser("table", help="full multiplication table")
    _common(p)

    p = sub.add_parser("cache", help="inspect or fill the cache")
    _common(p)
    p.add_argument("action", choices=("build", "clear", "status"))
    return parser


# -- output ---------------------------------------------------------------

def _emit(cfg: JobConfig, text: str):
    if cfg.output is not None:
        atomic_write_text(cfg.output, text)
        cfg.progress(f"wrote {cfg.output}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _class_json(x) -> list:
    return [{"class": c.label, "word": list(c.word), "coeff": frac_to_str(v)} for c, v in x.items()]


# -- commands ---------------------------------------------------------------

def cmd_hasse(cfg: JobConfig, args):
    ring = cfg.ring()
    graph = ring.build_hasse() if args.skeleton else ring.build_pieri_graph(args.letter)
    if cfg.fmt == "dot":
        return graph.to_dot()
    if cfg.fmt == "json":
        return dump_json(graph.to_json())
    lines = [f"# {ring.spec}/{ring.theta.label()}: {len(graph.nodes)} classes, dim {ring.dim}",
             "# counts per codim: " + " ".join(map(str, graph.counts()))]
    for e in graph.edges:
        w = "" if e.weight is None else f" x{e.weight}"
        lines.append(f"{e.source.label} -> {e.target.label} s{e.letter}{w}")
    return "\n".join(lines) + "\n"


def cmd_multiply(cfg: JobConfig, args):
    ring = cfg.ring()
    try:
        x, y = ring.resolve(args.left), ring.resolve(args.right)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc)) from None
    if x.codim + y.codim > ring.dim:
        cfg.progress(f"codimension {x.codim + y.codim} exceeds dim {ring.dim}; the product is 0")
    res = ring.multiply(ring.basis_class(x), ring.basis_class(y), route=args.route)
    if cfg.fmt == "json":
        return dump_json({"left": x.label, "right": y.label, "terms": _class_json(res)})
    return f"{x.label} * {y.label} = {res.format()}\n{res.format(words=True)}\n"


def cmd_preimage(cfg: JobConfig, args):
    ring = cfg.ring(reduce=not args.no_reduce)
    try:
        x = ring.resolve(args.cls)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc)) from None
    target = ring.basis_class(x)
    out = ""
    if args.dump_system:
        system = build_system(ring.tree, x.codim, target.terms, ring.variant)
        out += system.dump()
    p = ring.preimage(target)
    if cfg.fmt == "json":
        return out + dump_json({"class": x.label, "polynomial": format_polynomial(p),
                                "terms": [[list(m), frac_to_str(c)] for m, c in p.sorted_terms()]})
    return out + format_polynomial(p) + "\n"


def cmd_cfunc(cfg: JobConfig, args):
    ring = cfg.ring()
    try:
        p = parse_polynomial(args.polynomial, ring.spec.rank)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    from .chowring import ChowClass

    res = ChowClass(ring)
    for k in sorted({sum(m) for m in p.terms}):
        part = p.homogeneous_part(k)
        try:
            res = res + ChowClass(ring, c_map(part, ring.tree))
        except ValueError as exc:
            raise CliError(str(exc)) from None
    if cfg.fmt == "json":
        return dump_json({"polynomial": format_polynomial(p), "terms": _class_json(res)})
    return res.format() + "\n"


def cmd_table(cfg: JobConfig, args):
    ring = cfg.ring()
    t0 = time.time()
    pres = ring.generate()
    cfg.progress(f"generators {', '.join(pres.generator_names())}; "
                 f"preimages needed in codims {pres.gaps}")
    table = ring.full_table(threads=cfg.threads)
    cfg.progress(f"{len(table)} products in {time.time() - t0:.1f}s")
    if cfg.fmt == "json":
        return dump_json(ring.table_json(table))
    if cfg.fmt == "dot":
        raise CliError("table has no DOT form; use --format json or text")
    lines = [f"# {ring.spec}/{ring.theta.label()} dim {ring.dim}",
             f"# preimage codims: {' '.join(map(str, pres.gaps)) or 'none'}"]
    for (x, y), r in table.items():
        lines.append(f"{x.label} * {y.label} = {r.format()}")
    return "\n".join(lines) + "\n"


def cmd_cache(cfg: JobConfig, args):
    if cfg.cache_dir is None:
        raise CliError("the cache is disabled (--no-cache)")
    cache = cfg.cache()
    if args.action == "status":
        entries = cache.entries()
        if cfg.fmt == "json":
            return dump_json({"root": str(cache.root), "entries": entries})
        return f"# {cache.root}: {len(entries)} entries\n" + "".join(e + "\n" for e in entries)
    if args.action == "clear":
        n = cache.clear()
        return f"removed {n} entries from {cache.root}\n"
    ring = cfg.ring()
    ring.group.minimal_coset_reps(ring.theta, cache=cache)
    pres = ring.generate()
    return (f"cached {ring.spec}/{ring.theta.label()}: generators "
            f"{', '.join(pres.generator_names())} in {cache.root}\n")


HANDLERS = {
    "hasse": cmd_hasse,
    "multiply": cmd_multiply,
    "preimage": cmd_preimage,
    "cfunc": cmd_cfunc,
    "table": cmd_table,
    "cache": cmd_cache,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = JobConfig.from_args(args)
        if cfg.fmt == "dot" and cfg.command != "hasse":
            raise CliError("--format dot is only available for hasse")
        text = HANDLERS[cfg.command](cfg, args)
    except (CliError, ValueError, ArithmeticError, KeyError, OSError) as exc:
        print(f"chowcalc: error: {exc}", file=sys.stderr)
        return 1
    _emit(cfg, text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
