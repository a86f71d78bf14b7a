"""Command-line client for the pricing service.

Every command is a thin wrapper over the HTTP API: the market file is
parsed locally, shipped as the request body, and the response rendered.
By default the app is mounted in-process; pass --server to target a
running instance instead (see the serve command).

Exit codes: 0 success, 1 validation-suite failure, 2 parse/semantic
error, 3 numeric domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .errors import MarketFileError
from .marketfile import MarketSpecDocument, dump_document, load_document

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

_TIMEOUT = 3600.0


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=_TIMEOUT) as client:
            return client.post(path, json=payload)

    from .service import app

    async def _run() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://poweropt.internal", timeout=_TIMEOUT
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_run())


def _error_exit(resp: httpx.Response) -> int:
    try:
        body = resp.json()
    except ValueError:
        body = {"detail": resp.text}
    detail = body.get("detail", body)
    print(f"error: {detail}", file=sys.stderr)
    if resp.status_code == 422:
        return EXIT_PARSE
    error_class = body.get("error_class", "")
    if error_class == "io":
        return EXIT_IO
    return EXIT_DOMAIN


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _load(path: str) -> MarketSpecDocument:
    return load_document(path)


def _cmd_price(args: argparse.Namespace) -> int:
    doc = _load(args.spec_file)
    if args.dump_spec:
        print(dump_document(doc), end="")
        return EXIT_OK
    resp = _post(
        args.server,
        "/price",
        {"document": doc.model_dump(mode="json"), "method": args.method},
    )
    if resp.status_code != 200:
        return _error_exit(resp)
    report = resp.json()
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK
    for leg in report["legs"]:
        print(
            f"method={leg['method']:<10} price={_fmt(leg['price'])}  "
            f"term_a={_fmt(leg['term_a'])}  term_b={_fmt(leg['term_b'])}  "
            f"d1={_fmt(leg['d1'])}  d2={_fmt(leg['d2'])}"
        )
    if report["gap"] is not None:
        print(f"gap={_fmt(report['gap'])}  gap_relative={_fmt(report['gap_relative'])}")
    print(f"parity_residual={_fmt(report['parity_residual'])}")
    b = report["bundle"]
    print(
        "bundle: "
        + "  ".join(f"{k}={_fmt(v)}" for k, v in b.items())
    )
    return EXIT_OK


def _cmd_bond(args: argparse.Namespace) -> int:
    doc = _load(args.spec_file)
    resp = _post(args.server, "/bond", {"document": doc.model_dump(mode="json")})
    if resp.status_code != 200:
        return _error_exit(resp)
    report = resp.json()
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK
    print(
        f"bond_price={_fmt(report['price'])}  mean_int_r={_fmt(report['mean_int_r'])}  "
        f"var_x={_fmt(report['var_x'])}"
    )
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    doc = _load(args.spec_file)
    payload: dict = {"document": doc.model_dump(mode="json")}
    for key in ("paths", "steps", "seed"):
        value = getattr(args, key)
        if value is not None:
            payload[key] = value
    resp = _post(args.server, "/validate", payload)
    if resp.status_code != 200:
        return _error_exit(resp)
    report = resp.json()
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(
            f"n_paths={report['n_paths']}  n_steps={report['n_steps']}  "
            f"seed={report['seed']}"
        )
        for check in report["checks"]:
            status = "ok" if check["passed"] else "FAIL"
            print(
                f"{check['label']:<28} reference={_fmt(check['reference'])}  "
                f"estimate={_fmt(check['estimate'])}  "
                f"std_error={_fmt(check['std_error'])}  z={_fmt(check['z'])}  "
                f"[{status}]"
            )
        if report["girsanov_skipped"]:
            print(f"girsanov checks skipped: {report['girsanov_skipped']}")
        parity_status = "ok" if report["parity_passed"] else "FAIL"
        print(
            f"parity_residual={_fmt(report['parity_residual'])} "
            f"(tolerance {_fmt(report['parity_tolerance'])}) [{parity_status}]"
        )
        print("result: " + ("PASS" if report["passed"] else "FAIL"))
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _cmd_simulate(args: argparse.Namespace) -> int:
    payload: dict = {"figure1": bool(args.figure1)}
    if not args.figure1:
        if args.spec_file is None:
            print("error: simulate needs a spec file unless --figure1", file=sys.stderr)
            return EXIT_PARSE
        doc = _load(args.spec_file)
        payload["document"] = doc.model_dump(mode="json")
    resp = _post(args.server, "/simulate", payload)
    if resp.status_code != 200:
        return _error_exit(resp)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for entry in resp.json()["files"]:
            target = out_dir / entry["name"]
            target.write_text(entry["content"])
            print(target)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poweropt",
        description="European power option pricing under a Vasicek short rate "
        "and an exponential Ornstein-Uhlenbeck asset",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run in-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="closed-form option price")
    p_price.add_argument("spec_file")
    p_price.add_argument(
        "--method", choices=["martingale", "forward", "both"], default="both"
    )
    p_price.add_argument("--json", action="store_true")
    p_price.add_argument(
        "--dump-spec", action="store_true",
        help="print the canonical document and exit",
    )
    p_price.set_defaults(func=_cmd_price)

    p_bond = sub.add_parser("bond", help="zero-coupon bond price")
    p_bond.add_argument("spec_file")
    p_bond.add_argument("--json", action="store_true")
    p_bond.set_defaults(func=_cmd_bond)

    p_val = sub.add_parser("validate", help="Monte Carlo and parity validation suite")
    p_val.add_argument("spec_file")
    p_val.add_argument("--paths", type=int, default=None)
    p_val.add_argument("--steps", type=int, default=None)
    p_val.add_argument("--seed", type=int, default=None)
    p_val.add_argument("--json", action="store_true")
    p_val.set_defaults(func=_cmd_validate)

    p_sim = sub.add_parser("simulate", help="export simulated paths as CSV")
    p_sim.add_argument("spec_file", nargs="?")
    p_sim.add_argument("--out", default=".")
    p_sim.add_argument(
        "--figure1", action="store_true",
        help="export the reference GBM vs mean-reverting comparison",
    )
    p_sim.set_defaults(func=_cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MarketFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
