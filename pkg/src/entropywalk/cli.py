"""Command-line interface: ``entropywalk {detect,circles,centrality,stream,gen,sweep}``.

Results go to standard output (or ``--output``); run statistics always go to
standard error. Exit codes: 0 success, 2 configuration error, 3 input error,
4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from contextlib import contextmanager

from . import graph as graphs
from .centrality import centrality_delta, eigenvector_centrality, walk_centrality
from .community import DEFAULT_MIN_SHARE, rank_communities
from .detect import detect
from .errors import ConfigurationError, DomainError, EntropyWalkError, ParseError
from .streaming import Budget, CountMinSketch, MutableGraph, TopN, read_mutations, stream_loop
from .sweep import graph_family, sweep_et, sweep_graphs, write_csv
from .walker import WalkParams

logger = logging.getLogger("entropywalk")

EXIT_CONFIG, EXIT_INPUT, EXIT_RUNTIME = 2, 3, 4
THREADS_ENV = "ENTROPYWALK_THREADS"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- argument groups ----------------------------------------------------------


def _add_graph_source(ap: argparse.ArgumentParser, required: bool = True) -> None:
    src = ap.add_mutually_exclusive_group(required=required)
    src.add_argument("--graph", metavar="PATH", help="edge-list file")
    src.add_argument(
        "--generate",
        metavar="SPEC",
        help="synthetic graph, e.g. ba:n=1000,m=3 | ring:k=4,c=5 | gnm:n=100,edges=300 | toy",
    )
    ap.add_argument("--directed", action="store_true", help="read --graph as directed")
    ap.add_argument("--graph-seed", type=int, default=None, help="seed for --generate (default: --seed)")


def _add_walk(ap: argparse.ArgumentParser) -> None:
    w = ap.add_argument_group("walk")
    w.add_argument("--tours", type=int, default=10_000, help="number of tours (default 10000)")
    w.add_argument(
        "--length",
        type=int,
        default=15,
        help="tour length in visited nodes; a tour makes length-1 hops (default 15)",
    )
    w.add_argument("--min", dest="minm", type=int, default=4, help="minimum community members (default 4)")
    w.add_argument("--max", dest="maxm", type=int, default=8, help="maximum community members (default 8)")
    w.add_argument("--et", type=float, default=0.75, help="entropy threshold in (0, 1] (default 0.75)")
    w.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    w.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get(THREADS_ENV, "1")),
        help=f"walker threads (default ${THREADS_ENV} or 1)",
    )


def _add_community(ap: argparse.ArgumentParser) -> None:
    c = ap.add_argument_group("communities")
    c.add_argument("--key-width", type=int, default=None, help="nodes in the bucket key (default --min)")
    c.add_argument("--mode", choices=("key", "lsh"), default="key", help="bucketing: top-n key or banded minhash")
    c.add_argument("--bands", type=int, default=8)
    c.add_argument("--rows", type=int, default=4)
    c.add_argument("--jaccard", type=float, default=0.6, help="minimum Jaccard to merge in lsh mode")
    c.add_argument("--top", type=int, default=20, help="communities to report (default 20)")
    c.add_argument("--min-matches", type=int, default=1)
    c.add_argument(
        "--min-share",
        type=float,
        default=DEFAULT_MIN_SHARE,
        help="member floor as a fraction of the top member's frequency",
    )
    c.add_argument(
        "--no-merge-identical",
        dest="merge_identical",
        action="store_false",
        help="report buckets separately even when their member sets coincide",
    )


def _add_output(ap: argparse.ArgumentParser, default: str = "tsv") -> None:
    ap.add_argument("--format", choices=("tsv", "json"), default=default)
    ap.add_argument("--output", metavar="PATH", default=None, help="write results here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entropywalk", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect overlapping communities")
    _add_graph_source(p)
    _add_walk(p)
    _add_community(p)
    _add_output(p)

    p = sub.add_parser("circles", help="communities of tours that all start at one node")
    _add_graph_source(p)
    p.add_argument("--seed-node", required=True, metavar="LABEL")
    _add_walk(p)
    _add_community(p)
    _add_output(p)

    p = sub.add_parser("centrality", help="walk centrality against eigenvector centrality")
    _add_graph_source(p)
    _add_walk(p)
    p.add_argument("--peak-sigma", type=float, default=2.0, help="peak cut in standard deviations")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    _add_output(p)

    p = sub.add_parser("stream", help="continuous detection over a mutation stream")
    _add_graph_source(p)
    _add_walk(p)
    p.add_argument("--key-width", type=int, default=None)
    p.add_argument("--mutations", metavar="PATH", default=None, help="mutation lines; '-' for stdin")
    p.add_argument("--budget", type=int, default=None, help="tour budget")
    p.add_argument("--seconds", type=float, default=None, help="time budget")
    p.add_argument("--capacity", type=int, default=10, help="top-n size")
    p.add_argument("--width", type=int, default=2048)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--snapshot-interval", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--mutations-per-batch", type=int, default=1)
    p.add_argument("--decay-interval", type=int, default=None)
    p.add_argument("--min-matches", type=int, default=1)
    _add_output(p, default="json")

    p = sub.add_parser("gen", help="write a synthetic graph as an edge list")
    p.add_argument("--model", choices=("ba", "ring", "gnm"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=int)
    p.add_argument("--edges", type=int)
    p.add_argument("--seed", type=int, default=None)
    _add_output(p)

    p = sub.add_parser("sweep", help="sweep one parameter and emit x,mean,sd,replicates")
    _add_graph_source(p, required=False)
    _add_walk(p)
    axis = p.add_argument_group("axis (exactly one)")
    axis.add_argument("--et-list", type=_floats, default=None)
    axis.add_argument("--nodes-list", type=_floats, default=None)
    axis.add_argument("--ba-m-list", type=_floats, default=None)
    p.add_argument("--family", choices=("ba", "ring"), default="ba", help="graph family for --nodes-list")
    p.add_argument("--m", type=int, default=3, help="BA m for --nodes-list")
    p.add_argument("--n", type=int, default=1000, help="BA n for --ba-m-list")
    p.add_argument("--c", type=int, default=5, help="clique size for --family ring")
    p.add_argument("--metric", choices=("accepted", "tours", "buckets", "clustering"), default=None)
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--key-width", type=int, default=None)
    _add_output(p)
    return ap


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# -- helpers --------------------------------------------------------------------


def _parse_spec(spec: str) -> tuple[str, dict[str, int]]:
    model, _, rest = spec.partition(":")
    kwargs = {}
    for part in filter(None, rest.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise CliError(f"bad generator parameter {part!r} in {spec!r}", EXIT_CONFIG)
        try:
            kwargs[key.strip()] = int(val)
        except ValueError:
            raise CliError(f"generator parameter {key} must be an integer", EXIT_CONFIG) from None
    return model.strip(), kwargs


def _generate(model: str, params: dict[str, int], seed: int | None) -> graphs.Graph:
    try:
        if model == "ba":
            return graphs.generate_barabasi_albert(params["n"], params["m"], seed)
        if model == "ring":
            return graphs.generate_ring_of_cliques(params["k"], params["c"], seed)
        if model == "gnm":
            return graphs.generate_gnm(params["n"], params["edges"], seed)
        if model == "toy":
            return graphs.load_toy_graph()
    except KeyError as exc:
        raise CliError(f"generator {model!r} needs parameter {exc.args[0]}", EXIT_CONFIG) from None
    raise CliError(f"unknown generator {model!r}", EXIT_CONFIG)


def load_graph(args) -> graphs.Graph:
    if args.graph:
        try:
            return graphs.read_edge_list(args.graph, directed=args.directed)
        except OSError as exc:
            raise CliError(f"cannot read {args.graph}: {exc.strerror}", EXIT_INPUT) from None
    model, params = _parse_spec(args.generate)
    seed = args.graph_seed if args.graph_seed is not None else getattr(args, "seed", None)
    return _generate(model, params, seed)


def walk_params(args, start: int | None = None) -> WalkParams:
    return WalkParams(
        nt=args.tours,
        lt=args.length,
        minm=args.minm,
        maxm=args.maxm,
        et=args.et,
        start=start,
        master_seed=args.seed,
    )


@contextmanager
def _out(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_INPUT) from None
    with fh:
        yield fh


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_communities(records, g: graphs.Graph, fmt: str, stream) -> None:
    if fmt == "tsv":
        stream.write("matches\tmembers\tfreq\n")
    for r in records:
        labels = [g.label(v) for v in r.members]
        if fmt == "json":
            stream.write(json.dumps({"matches": r.matches, "members": labels, "freq": r.freq}) + "\n")
        else:
            stream.write(f"{r.matches}\t{','.join(labels)}\t{','.join(map(str, r.freq))}\n")


# -- commands -------------------------------------------------------------------


def _run_detect(args, start: int | None = None):
    g = load_graph(args)
    require = None
    if start is not None:
        require = start = _seed_node(g, start)
    p = walk_params(args, start)
    d = detect(
        g,
        p,
        key_width=args.key_width,
        mode=args.mode,
        bands=args.bands,
        rows=args.rows,
        j_min=args.jaccard,
        threads=args.threads,
    )
    records, suppressed = rank_communities(
        d.store,
        p.minm,
        p.maxm,
        k=args.top,
        min_matches=args.min_matches,
        min_share=args.min_share,
        merge_identical=args.merge_identical,
        require=require,
    )
    d.stats.extra["suppressed"] = suppressed
    d.stats.extra["reported"] = len(records)
    with _out(args.output) as fh:
        write_communities(records, g, args.format, fh)
    print(d.stats.summary(), file=sys.stderr)


def _seed_node(g: graphs.Graph, label: str) -> int:
    try:
        return g.node_id(label)
    except DomainError:
        raise CliError(f"unknown seed node {label!r}", EXIT_INPUT) from None


def cmd_detect(args) -> None:
    _run_detect(args)


def cmd_circles(args) -> None:
    _run_detect(args, start=args.seed_node)


def cmd_centrality(args) -> None:
    g = load_graph(args)
    p = walk_params(args)
    t0 = time.perf_counter()
    table = walk_centrality(g, p, threads=args.threads)
    walk = table.scores()
    ref = eigenvector_centrality(g, tol=args.tol, max_iter=args.max_iter)
    rep = centrality_delta(walk, ref.scores, peak_sigma=args.peak_sigma)
    ref_simplex = ref.scores / ref.scores.sum()
    peaks = set(rep.peaks)
    order = sorted(range(g.node_count), key=lambda v: (-walk[v], v))
    with _out(args.output) as fh:
        if args.format == "tsv":
            fh.write("label\twalk_score\treference_score\tdelta\tpeak\n")
        for v in order:
            row = (g.label(v), walk[v], ref_simplex[v], rep.delta[v], v in peaks)
            if args.format == "json":
                keys = ("label", "walk_score", "reference_score", "delta", "peak")
                fh.write(json.dumps(dict(zip(keys, (row[0], *map(float, row[1:4]), row[4])))) + "\n")
            else:
                fh.write("\t".join([row[0], *map(_fmt, row[1:4]), str(int(row[4]))]) + "\n")
    print(
        f"generated={p.nt} visits_counted={table.total} peaks={len(peaks)} "
        f"eigen_iterations={ref.iterations} seconds={time.perf_counter() - t0:.3f}",
        file=sys.stderr,
    )


def cmd_stream(args) -> None:
    g = MutableGraph.from_graph(load_graph(args))
    p = walk_params(args)
    cms = CountMinSketch(args.width, args.depth, seed=args.seed)
    topn = TopN(args.capacity)
    if args.mutations is None:
        source = iter(())
    elif args.mutations == "-":
        source = read_mutations(sys.stdin)
    else:
        try:
            source = read_mutations(open(args.mutations, encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"cannot read {args.mutations}: {exc.strerror}", EXIT_INPUT) from None
    budget = Budget(tours=args.budget, seconds=args.seconds)
    snaps = 0
    last = None
    with _out(args.output) as fh:
        for snap in stream_loop(
            g,
            p,
            cms,
            topn,
            source,
            budget=budget,
            snapshot_interval=args.snapshot_interval,
            batch_size=args.batch_size,
            mutations_per_batch=args.mutations_per_batch,
            decay_interval=args.decay_interval,
            min_matches=args.min_matches,
            key_width=args.key_width,
        ):
            snaps += 1
            last = snap
            if args.format == "json":
                fh.write(snap.to_json(g) + "\n")
            else:
                for rank, (key, est) in enumerate(snap.entries, start=1):
                    fh.write(f"{snap.tours}\t{rank}\t{est}\t{','.join(g.label(v) for v in key)}\n")
            fh.flush()
    tours = last.tours if last else 0
    muts = f"mutations={last.mutations} mutation_errors={last.mutation_errors}" if last else "mutations=0"
    print(f"tours={tours} snapshots={snaps} {muts} noops={g.noops}", file=sys.stderr)


def cmd_gen(args) -> None:
    names = {"ba": ("n", "m"), "ring": ("k", "c"), "gnm": ("n", "edges")}[args.model]
    params = {}
    for name in names:
        if getattr(args, name) is None:
            raise CliError(f"--model {args.model} needs --{name}", EXIT_CONFIG)
        params[name] = getattr(args, name)
    g = _generate(args.model, params, args.seed)
    with _out(args.output) as fh:
        if args.format == "json":
            for u, v in g.edges():
                fh.write(json.dumps([g.label(u), g.label(v)]) + "\n")
        else:
            graphs.write_edge_list(g, fh)
    print(f"nodes={g.node_count} edges={g.edge_count}", file=sys.stderr)


def cmd_sweep(args) -> None:
    axes = [a for a in ("et_list", "nodes_list", "ba_m_list") if getattr(args, a) is not None]
    if len(axes) != 1:
        raise CliError("sweep needs exactly one of --et-list, --nodes-list, --ba-m-list", EXIT_CONFIG)
    if args.replicates < 1:
        raise CliError("--replicates must be >= 1", EXIT_CONFIG)
    p = walk_params(args)
    axis = axes[0]
    if axis == "et_list":
        if not (args.graph or args.generate):
            raise CliError("--et-list needs --graph or --generate", EXIT_CONFIG)
        rows = sweep_et(
            load_graph(args), p, args.et_list, metric=args.metric or "accepted",
            replicates=args.replicates, key_width=args.key_width,
        )
    else:
        if args.graph or args.generate:
            raise CliError("graph-family sweeps generate their own graphs; drop --graph/--generate", EXIT_CONFIG)
        if axis == "nodes_list":
            family = graph_family("ba-nodes", m=args.m) if args.family == "ba" else graph_family("ring-nodes", c=args.c)
            xs = args.nodes_list
        else:
            family, xs = graph_family("ba-m", n=args.n), args.ba_m_list
        rows = sweep_graphs(
            family, xs, p, metric=args.metric or "buckets",
            replicates=args.replicates, key_width=args.key_width,
        )
    with _out(args.output) as fh:
        if args.format == "json":
            for r in rows:
                fh.write(json.dumps({"x": r.x, "mean": r.mean, "sd": r.sd, "replicates": r.replicates}) + "\n")
        else:
            write_csv(rows, fh)


COMMANDS = {
    "detect": cmd_detect,
    "circles": cmd_circles,
    "centrality": cmd_centrality,
    "stream": cmd_stream,
    "gen": cmd_gen,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except CliError as exc:
        print(f"entropywalk: error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigurationError as exc:
        print(f"entropywalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, DomainError, UnicodeDecodeError) as exc:
        print(f"entropywalk: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EntropyWalkError as exc:
        print(f"entropywalk: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    sys.exit(main())
