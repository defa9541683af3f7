"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import pipeline as pl
from .diffusion import write_edges_csv
from .errors import DataError, InvariantError
from .ingest import write_tweets
from .synthcascade import ClassLabel, gen_corpus, write_truth

logger = logging.getLogger("hashtag_dynamics")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--seed", type=int, help="top-level random seed")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="hashtag-dynamics", description=__doc__.splitlines()[0],
                     parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="tweets -> daily series of popular hashtags")
    p.add_argument("--tweets", required=True)
    p.add_argument("--out", required=True, help="series CSV (a .json summary is written beside it)")
    p.add_argument("--start", help="first day, YYYY-MM-DD (default: day of the earliest tweet)")
    p.add_argument("--days", type=int, help="window length in days")
    p.add_argument("--min-users", type=int)

    p = sub.add_parser("peaks", parents=[common], help="detect and align isolated peaks")
    p.add_argument("--series", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edges", choices=("strict", "truncated"))

    p = sub.add_parser("features", parents=[common], help="before/peak/after fractions")
    p.add_argument("--peaks", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", parents=[common], help="fit mixtures and label hashtags")
    p.add_argument("--features", required=True)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("semantics", parents=[common], help="concept fingerprints per class")
    p.add_argument("--tweets", required=True)
    p.add_argument("--labels", required=True, help="assignments CSV from classify")
    p.add_argument("--wordnet-dir", help="WordNet database directory (default: shipped subset)")
    p.add_argument("--stopwords", help="stop-word list, one word per line")
    p.add_argument("--profiles", help="directory of language profiles")
    p.add_argument("--depth", type=int)
    p.add_argument("--topk", type=int)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("diffusion", parents=[common], help="retweets, gamma, beta, tau per hashtag")
    p.add_argument("--graph", required=True, help="follower,followee CSV")
    p.add_argument("--tweets", required=True)
    p.add_argument("--labels", required=True, help="assignments CSV from classify")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", parents=[common], help="synthetic multi-class corpus")
    p.add_argument("--out-tweets", required=True)
    p.add_argument("--out-truth", required=True)
    p.add_argument("--out-graph", help="also write the follower graph as CSV")
    p.add_argument("--out-config", help="also write a run config matching the corpus window")

    p = sub.add_parser("run", parents=[common], help="full pipeline")
    p.add_argument("--tweets")
    p.add_argument("--graph")
    p.add_argument("--out-dir")

    p = sub.add_parser("report", parents=[common], help="summarize a finished run")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plotdata", action="store_true", help="re-emit plot data first")
    return parser


def _config(args, **overrides):
    cfg = pl.load_config(args.config) if args.config else pl.PipelineConfig()
    return cfg.replace(seed=args.seed, **overrides)


def _single_stage(name, cfg, out_dir, inputs):
    """Run one stage in a scratch layout: copy its inputs under standard names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for src, dst in inputs:
        src = Path(src)
        if not src.exists():
            raise DataError(f"input not found: {src}")
        target = out / dst
        if src.resolve() != target.resolve():
            target.write_bytes(src.read_bytes())
    return pl.run_stage(name, cfg, out)


SIM_KEYS = {"n_per_class": int, "n_nodes": int, "mean_out_degree": float, "n_days": int,
            "beta": float, "repeat_rate": float, "peak_min": int, "peak_max": int, "classes": str}


def _simulate(args):
    values = pl.read_config(args.config) if args.config else {}
    opts = {}
    for key, raw in values.items():
        if key not in SIM_KEYS:
            raise ValueError(f"unknown simulation key {key!r}")
        opts[key] = SIM_KEYS[key](raw)
    peak_range = (opts.pop("peak_min", 120), opts.pop("peak_max", 250))
    classes = opts.pop("classes", None)
    if classes:
        classes = [ClassLabel(c.strip()) for c in classes.split(",")]
    corpus = gen_corpus(peak_range=peak_range, classes=classes, seed=args.seed or 0, **opts)
    write_tweets(args.out_tweets, corpus.tweets)
    write_truth(args.out_truth, corpus.truths)
    if args.out_graph:
        write_edges_csv(args.out_graph, corpus.graph)
    if args.out_config:
        start = datetime.fromtimestamp(corpus.start, tz=timezone.utc).date().isoformat()
        smallest = min(len(t.adoption_times) for t in corpus.truths)
        Path(args.out_config).write_text(
            f"start = {start}\nwindow_days = {corpus.n_days}\nmin_users = {max(1, smallest // 2)}\n",
            encoding="utf-8")
    logger.info("simulated %d tweets for %d hashtags", len(corpus.tweets), len(corpus.truths))


def dispatch(args):
    cmd = args.command
    if cmd == "simulate":
        _simulate(args)
        return
    if cmd == "report":
        cfg = _config(args, out_dir=args.out_dir)
        if args.plotdata:
            pl.emit_plotdata(cfg, args.out_dir)
        print(pl.format_report(args.out_dir))
        return
    if cmd == "run":
        cfg = _config(args, tweets=args.tweets, graph=args.graph, out_dir=args.out_dir)
        result = pl.run_pipeline(cfg)
        print(pl.format_report(result["out_dir"]))
        return
    if cmd == "ingest":
        cfg = _config(args, tweets=args.tweets, start=args.start, window_days=args.days,
                      min_users=args.min_users)
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        # the ingest stage writes series.csv; rename to the requested path
        summary = pl.run_stage("ingest", cfg, out.parent)
        produced = out.parent / "series.csv"
        if produced.resolve() != out.resolve():
            produced.replace(out)
            produced.with_suffix(".json").replace(out.with_suffix(".json"))
        print(summary)
        return
    if cmd == "peaks":
        cfg = _config(args, edges=args.edges)
        out = Path(args.out)
        series = Path(args.series)
        inputs = [(series, "series.csv"), (series.with_suffix(".json"), "series.json")]
        _single_stage("peaks", cfg, out.parent, inputs)
        produced = out.parent / "peaks.csv"
        if produced.resolve() != out.resolve():
            produced.replace(out)
            (out.parent / "peaks.aligned.csv").replace(out.with_name(out.stem + ".aligned.csv"))
        return
    if cmd == "features":
        cfg = _config(args)
        out = Path(args.out)
        peaks = Path(args.peaks)
        inputs = [(peaks, "peaks.csv"), (peaks.with_name(peaks.stem + ".aligned.csv"), "peaks.aligned.csv")]
        _single_stage("features", cfg, out.parent, inputs)
        produced = out.parent / "features.csv"
        if produced.resolve() != out.resolve():
            produced.replace(out)
        return
    if cmd == "classify":
        cfg = _config(args, kmin=args.kmin, kmax=args.kmax, restarts=args.restarts)
        print(_single_stage("classify", cfg, args.out, [(args.features, "features.csv")]))
        return
    if cmd == "semantics":
        cfg = _config(args, tweets=args.tweets, wordnet_dir=args.wordnet_dir,
                      stopwords=args.stopwords, profile_dir=args.profiles, depth=args.depth,
                      top_k=args.topk)
        print(_single_stage("semantics", cfg, args.out, [(args.labels, "assignments.csv")]))
        return
    if cmd == "diffusion":
        cfg = _config(args, tweets=args.tweets, graph=args.graph)
        print(_single_stage("diffusion", cfg, args.out, [(args.labels, "assignments.csv")]))
        return
    raise UsageError("a subcommand is required (see --help)")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        dispatch(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (DataError, ValueError, KeyError, OSError)):
            return EXIT_DATA
        return EXIT_INVARIANT
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
