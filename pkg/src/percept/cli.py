"""Command-line front end.

Each subcommand builds the same JSON payload the HTTP service accepts and
either executes it in-process (default) or posts it to a running service
when --server is given. Results are printed to stdout as JSON.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
failure.
"""

import argparse
import json
import sys
import urllib.error
import urllib.request

from .errors import DataError, PerceptError, UsageError
from .service import handlers

_LOCAL = {
    "/stats": lambda p: handlers.stats(p["input"], p["out"]),
    "/fd": lambda p: handlers.fd(p["a"], p["b"]),
    "/pr": lambda p: handlers.pr(p["real"], p["gen"], p["k"], threads=p.get("threads")),
    "/sweep": lambda p: handlers.run_sweep(
        p["manifest"],
        size=p["size"],
        draws=p["draws"],
        seed=p["seed"],
        grid=p.get("grid"),
        out=p.get("out"),
        threads=p.get("threads"),
    ),
    "/blur": lambda p: handlers.run_blur(
        p["images"],
        p["masks"],
        p["regions"],
        p["out"],
        kernel_size=p["kernel_size"],
        sigma=p["sigma"],
        threads=p.get("threads"),
    ),
    "/region-report": lambda p: handlers.region_report(p["pairs"], out=p.get("out")),
    "/leaderboard": lambda p: handlers.leaderboard(
        p["entries"], k=p["k"], out=p.get("out"), threads=p.get("threads")
    ),
    "/render": lambda p: handlers.render(p["input"], p["out"], title=p.get("title", "")),
}

_STATUS_TO_EXIT = {400: 1, 422: 2, 500: 3}

_GLOBAL_DEFAULTS = {"threads": None, "seed": 0, "server": None}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; the contract reserves 2 for
    # data errors, so usage failures are rerouted through UsageError (1).
    def error(self, message):
        raise UsageError(message)


def _grid(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"invalid grid: {text!r} (expected comma-separated floats)")


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=argparse.SUPPRESS,
        help="worker threads (0 = auto; PERCEPT_THREADS env as fallback)",
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 0)"
    )
    common.add_argument(
        "--server",
        default=argparse.SUPPRESS,
        help="base URL of a running service; if set, the command is sent there",
    )

    # The common actions use SUPPRESS defaults and are shared between the
    # root parser and every subparser, so a flag sticks no matter which side
    # of the subcommand it appears on; missing values are filled in main().
    parser = _Parser(prog="percept", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", parents=[common], help="summarize EMB1 into GSS1")
    p.add_argument("--input", required=True, help="EMB1 file")
    p.add_argument("--out", required=True, help="GSS1 output path")

    p = sub.add_parser("fd", parents=[common], help="Fréchet distance between two files")
    p.add_argument("a", help="EMB1 or GSS1 file")
    p.add_argument("b", help="EMB1 or GSS1 file")

    p = sub.add_parser("pr", parents=[common], help="kNN precision/recall")
    p.add_argument("--real", required=True, help="EMB1 file of real samples")
    p.add_argument("--gen", required=True, help="EMB1 file of generated samples")
    p.add_argument("--k", type=int, default=3, help="neighbor count (default 3)")

    p = sub.add_parser("sweep", parents=[common], help="attribute proportion sweep")
    p.add_argument("--manifest", required=True, help="pair manifest JSON")
    p.add_argument("--size", type=int, default=1000, help="mixed-set size")
    p.add_argument("--draws", type=int, default=10, help="draws per grid point")
    p.add_argument("--grid", type=_grid, default=None,
                   help="comma-separated d values (default 0,0.1,...,1)")
    p.add_argument("--out", default=None, help="curve CSV output path")

    p = sub.add_parser("blur", parents=[common], help="region-blur an image corpus")
    p.add_argument("--images", required=True, help="directory of .png images")
    p.add_argument("--masks", required=True, help="directory of labelmap .png files")
    p.add_argument("--regions", required=True, help="region config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--kernel-size", type=int, default=111, dest="kernel_size")
    p.add_argument("--sigma", type=float, default=100.0)

    p = sub.add_parser("region-report", parents=[common],
                       help="per-region FD report from embedding pairs")
    p.add_argument("--pairs", required=True, help="pairs JSON")
    p.add_argument("--out", default=None, help="report CSV output path")

    p = sub.add_parser("leaderboard", parents=[common],
                       help="FD/precision/recall table across generators")
    p.add_argument("--entries", required=True, help="entries JSON")
    p.add_argument("--k", type=int, default=3, help="neighbor count (default 3)")
    p.add_argument("--out", default=None, help="output path (.json or .csv)")

    p = sub.add_parser("render", parents=[common], help="render a result CSV to SVG")
    p.add_argument("--input", required=True, help="sweep-curve or region-report CSV")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--title", default="", help="plot title")

    return parser


def _payload(args) -> tuple[str, dict]:
    threads = args.threads
    if args.command == "stats":
        return "/stats", {"input": args.input, "out": args.out}
    if args.command == "fd":
        return "/fd", {"a": args.a, "b": args.b}
    if args.command == "pr":
        return "/pr", {"real": args.real, "gen": args.gen, "k": args.k,
                       "threads": threads}
    if args.command == "sweep":
        return "/sweep", {"manifest": args.manifest, "size": args.size,
                          "draws": args.draws, "seed": args.seed,
                          "grid": args.grid, "out": args.out, "threads": threads}
    if args.command == "blur":
        return "/blur", {"images": args.images, "masks": args.masks,
                         "regions": args.regions, "out": args.out,
                         "kernel_size": args.kernel_size, "sigma": args.sigma,
                         "threads": threads}
    if args.command == "region-report":
        return "/region-report", {"pairs": args.pairs, "out": args.out}
    if args.command == "leaderboard":
        return "/leaderboard", {"entries": args.entries, "k": args.k,
                                "out": args.out, "threads": threads}
    if args.command == "render":
        return "/render", {"input": args.input, "out": args.out, "title": args.title}
    raise UsageError("no subcommand given (see --help)")


def _post(server: str, route: str, payload: dict) -> dict:
    url = server.rstrip("/") + route
    req = urllib.request.Request(
        url,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        try:
            detail = json.loads(exc.read()).get("detail", str(exc))
        except (ValueError, AttributeError):
            detail = str(exc)
        code = _STATUS_TO_EXIT.get(exc.code, 2)
        err = PerceptError(f"{url}: {detail}")
        err.exit_code = code
        raise err from exc
    except urllib.error.URLError as exc:
        raise DataError(f"cannot reach {url}: {exc.reason}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name, default in _GLOBAL_DEFAULTS.items():
            if not hasattr(args, name):
                setattr(args, name, default)
        route, payload = _payload(args)
        if args.server:
            result = _post(args.server, route, payload)
        else:
            result = _LOCAL[route](payload)
    except PerceptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
