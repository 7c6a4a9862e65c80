"""Command-line entry point: one-shot graph tools and seeded experiment runs.

Exit status is 0 on success, 2 for configuration errors and 1 for any
other failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

from .config import ConfigError, build_config, parse_key_values

log = logging.getLogger("sbmspec")

EXPERIMENTS = {
    "ratio-surface": "ratio-surface",
    "sweep": None,  # kind picked by --grid or the config file
    "analytic-accuracy": "analytic-accuracy",
    "linkpred": "linkpred",
    "zero-comm": "zero-comm",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


@contextlib.contextmanager
def _output(path):
    if path in (None, "", "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _model_values(args):
    vals = parse_key_values(args.config) if args.config else {}
    for key in ("n", "pi", "alpha", "beta", "gamma"):
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = str(v)
    if args.seed is not None:
        vals["seed"] = str(args.seed)
    return vals


def cmd_generate(args):
    from .graph import save_edge_list, save_labels
    from .sbm import load_params, sample, warn_if_degenerate

    params, seed = load_params(_model_values(args))
    warn_if_degenerate(params)
    if args.labels and args.labels == args.out:
        raise ConfigError("field 'labels': must differ from --out")
    g, truth = sample(params, seed)
    with _output(args.out) as f:
        save_edge_list(g, f)
    if args.labels:
        save_labels(truth, args.labels)
    log.info("n=%d edges=%d seed=%d", g.node_count, g.edge_count, seed)
    return 0


def _load_graph(path):
    from .graph import load_edge_list

    if not os.path.exists(path):
        raise ConfigError(f"field 'graph': no such file {path!r}")
    vocab = {}
    g, _ = load_edge_list(path, vocab)
    return g, vocab


def cmd_cluster(args):
    from .clustering import spectral_cluster
    from .graph import save_labels

    if args.k < 1:
        raise ConfigError("field 'k': must be >= 1")
    g, _ = _load_graph(args.graph)
    if args.k > g.node_count:
        raise ConfigError(f"field 'k': {args.k} exceeds the node count {g.node_count}")
    assignment, emb = spectral_cluster(g, args.k, args.normalized, seed=args.seed or 0,
                                       restarts=args.restarts, row_normalize=args.row_normalize)
    with _output(args.out) as f:
        save_labels(assignment.labels, f, names=list(g.node_names))
    if emb.degenerate:
        log.warning("leading eigenvalues are nearly repeated; the embedding basis is arbitrary")
    log.info("sizes=%s within_ss=%.6g", assignment.sizes.tolist(), assignment.within_ss)
    return 0


def cmd_metrics(args):
    from .clustering import spectral_embedding
    from .graph import load_labels
    from .metrics import misclassification_rate, quality_metrics, write_csv

    g, vocab = _load_graph(args.graph)
    truth = load_labels(args.labels, vocab)
    predicted = load_labels(args.predicted, vocab) if args.predicted else None
    rows = []
    for normalized in (False, True):
        emb = spectral_embedding(g, 2, normalized, seed=args.seed or 0)
        q = quality_metrics(emb, truth)
        rows.append(dict(method="norm" if normalized else "unnorm", d11_sq=q.d11_sq, d12_sq=q.d12_sq,
                         d21_sq=q.d21_sq, d22_sq=q.d22_sq, center_gap_sq=q.center_gap_sq,
                         misclassification="" if predicted is None else misclassification_rate(predicted, truth)))
    with _output(args.out) as f:
        write_csv(rows, f)
    return 0


def _experiment_config(args, kind):
    values = parse_key_values(args.config) if args.config else {}
    file_kind = values.pop("kind", None)
    if kind is None:
        kind = {"gamma-alpha": "sweep-gamma-alpha", "n": "sweep-n"}.get(args.grid or "", None) or file_kind
        if kind is None:
            raise ConfigError("field 'kind': sweep needs --grid gamma-alpha|n or kind= in the config")
        if kind not in ("sweep-gamma-alpha", "sweep-n"):
            raise ConfigError(f"field 'kind': {kind!r} is not a sweep")
    elif file_kind is not None and file_kind != kind:
        raise ConfigError(f"field 'kind': config is for {file_kind!r}, subcommand runs {kind!r}")
    values.update(_overrides(args.set))
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.out is not None:
        values["output"] = args.out
    cfg = build_config(kind, values)
    if kind == "linkpred":
        from .graph import load_manifest

        manifest = cfg.options["manifest"]
        if not os.path.exists(manifest):
            raise ConfigError(f"field 'manifest': no such file {manifest!r}")
        paths = load_manifest(manifest)
        if len(paths) < 3:
            raise ConfigError(f"field 'manifest': lists {len(paths)} snapshot(s), need at least 3")
        missing = [p for p in paths if not os.path.exists(p)]
        if missing:
            raise ConfigError(f"field 'manifest': missing snapshot {missing[0]!r}")
    return cfg


def cmd_experiment(args):
    from .experiments import run_experiment

    cfg = _experiment_config(args, EXPERIMENTS[args.command])
    if cfg.output in ("", "-"):
        run_experiment(cfg, sys.stdout)
    else:
        run_experiment(cfg)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (overrides the config)")
    common.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")
    common.add_argument("--config", default=None, help="flat key=value config file")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="sbmspec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="sample a two-class blockmodel graph")
    for key, typ in (("n", int), ("pi", float), ("alpha", float), ("beta", float), ("gamma", float)):
        g.add_argument(f"--{key}", type=typ)
    g.add_argument("--labels", help="also write node<TAB>class to this path")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", parents=[common], help="spectral clustering of an edge list")
    c.add_argument("graph")
    c.add_argument("-k", type=int, default=2)
    c.add_argument("--normalized", action=argparse.BooleanOptionalAction, default=True)
    c.add_argument("--restarts", type=int, default=5)
    c.add_argument("--row-normalize", action="store_true")
    c.set_defaults(func=cmd_cluster)

    m = sub.add_parser("metrics", parents=[common], help="oracle-center distances for both embeddings")
    m.add_argument("graph")
    m.add_argument("labels", help="true classes, node<TAB>label")
    m.add_argument("--predicted", help="predicted labels, for the misclassification rate")
    m.set_defaults(func=cmd_metrics)

    for name in EXPERIMENTS:
        e = sub.add_parser(name, parents=[common], help=f"{name} experiment to CSV")
        e.add_argument("set", nargs="*", metavar="KEY=VALUE", help="config overrides")
        if name == "sweep":
            e.add_argument("--grid", choices=("gamma-alpha", "n"),
                           help="sweep over (alpha, gamma/alpha) or over n")
        e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
