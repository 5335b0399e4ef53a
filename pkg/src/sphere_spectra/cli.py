"""Command-line front end.

Commands:
  spectrum   roots of the series determinant for one (k, eps, x0, M);
             x0 = 1 is answered from the closed-form spectra
  oracle     roots of the shooting integrator (independent of the series);
             --chi selects the transformed self-adjoint problem
  trace      roots swept along x0 or eps with coalescence tracking
  figures    canned sweeps reproducing the published root diagrams
  verify     run the self-verification suite

Output is CSV (default) or JSON with the fixed row schema
param,branch,re_s,im_s,re_mu,im_mu,residual,stable,source at 15
significant digits; identical configs produce byte-identical files.
Exit codes: 0 ok, 1 verification failure, 2 bad configuration,
3 non-finite solver state.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__, analytic, boundary, oracle, verify
from .core import NonFiniteError, SpectralParams, in_stability_domain
from .rootfinder import ScanConfig, scan_real_roots, trace_parameter

SCHEMA = ("param", "branch", "re_s", "im_s", "re_mu", "im_mu",
          "residual", "stable", "source")

SWEEP_PARAMS = ("x0", "eps", "M")


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: command, problem instance, scan window,
    optional sweep, output destination."""

    command: str
    params: SpectralParams
    scan: ScanConfig
    sweep: tuple | None = None        # (name, start, stop, step)
    output: str | None = None
    fmt: str = "csv"
    n_steps: int = 2000
    chi: bool = False

    def __post_init__(self):
        if (self.sweep is not None) != (self.command in ("trace", "figures")):
            raise ValueError("a sweep is required exactly for the trace and "
                             "figures commands")
        if self.sweep is not None:
            name, start, stop, step = self.sweep
            if name not in SWEEP_PARAMS:
                raise ValueError(f"sweep parameter must be one of "
                                 f"{SWEEP_PARAMS}, got {name!r}")
            if step <= 0 or stop <= start:
                raise ValueError("sweep needs stop > start and step > 0")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")


def _fmt(x: float) -> str:
    return f"{x + 0.0:.15g}"     # +0.0 folds -0.0 into 0


def _row(param, branch, s, mu, residual, source):
    return {
        "param": _fmt(param), "branch": str(branch),
        "re_s": _fmt(s.real), "im_s": _fmt(s.imag),
        "re_mu": _fmt(mu.real), "im_mu": _fmt(mu.imag),
        "residual": _fmt(residual),
        "stable": "true" if in_stability_domain(s) else "false",
        "source": source,
    }


def _emit(rows, cfg: RunConfig, meta: dict):
    text = _render(rows, cfg.fmt, meta)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(rows, fmt: str, meta: dict) -> str:
    if fmt == "csv":
        lines = [",".join(SCHEMA)]
        lines += [",".join(r[c] for c in SCHEMA) for r in rows]
        return "\n".join(lines) + "\n"
    doc = {"meta": meta, "rows": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _meta(cfg: RunConfig) -> dict:
    return {
        "version": __version__,
        "command": cfg.command,
        "params": dataclasses.asdict(cfg.params),
        "scan": dataclasses.asdict(cfg.scan),
        "sweep": list(cfg.sweep) if cfg.sweep else None,
    }


def _filter_rows(roots, param, tol, source):
    """Render roots as rows, skipping (loudly) any whose residual exceeds
    the configured tolerance."""
    rows = []
    for i, r in enumerate(roots):
        if r.residual > tol:
            print(f"warning: dropping root s={r.s:.12g} with residual "
                  f"{r.residual:.2e} > tol {tol:.2e}", file=sys.stderr)
            continue
        rows.append(_row(param, i, r.s, r.mu, r.residual, r.source))
    return rows


def cmd_spectrum(cfg: RunConfig) -> int:
    p = cfg.params
    if p.x0 == 1.0:
        if p.k == 0:
            spec = analytic.spectrum_full_sphere_k0(p.eps, 32)
        else:
            spec = analytic.spectrum_full_sphere_k(p.k, p.eps, 32)
        rows = []
        branch = 0
        for s, mu in zip(spec.s_values, spec.mu_values):
            if s > cfg.scan.s_max:
                break
            rows.append(_row(p.x0, branch, complex(s), complex(mu),
                             0.0, "analytic"))
            branch += 1
        _emit(rows, cfg, _meta(cfg) | {"regime": spec.regime,
                                       "empty_nontrivial":
                                       spec.empty_nontrivial})
        return 0
    roots = scan_real_roots(boundary.det_functional(p), _scan_for(cfg))
    _emit(_filter_rows(roots, p.x0, cfg.scan.tol * 10, "series"),
          cfg, _meta(cfg))
    return 0


def cmd_oracle(cfg: RunConfig) -> int:
    p = cfg.params
    shoot = oracle.shoot_functional(p, n_steps=cfg.n_steps,
                                    which="chi" if cfg.chi else "auto")
    roots = oracle.oracle_roots(shoot, _scan_for(cfg))
    _emit(_filter_rows(roots, p.x0, cfg.scan.tol * 10, "oracle"),
          cfg, _meta(cfg) | {"n_steps": cfg.n_steps, "chi": cfg.chi})
    return 0


def _scan_for(cfg: RunConfig) -> ScanConfig:
    """k = 0 problems exclude the trivial mu = 0, so the scan starts just
    above s = 0 there."""
    scan = cfg.scan
    if (cfg.params.k == 0 or cfg.chi) and scan.s_min <= 0.0:
        scan = replace(scan, s_min=scan.step)
    return scan


def _family(params: SpectralParams, name: str):
    def make(p):
        if name == "x0":
            return boundary.det_functional(replace(params, x0=float(p)))
        if name == "eps":
            return boundary.det_functional(replace(params, eps=float(p)))
        return boundary.det_functional(replace(params, M=int(round(p))))
    return make


def _trace_rows(branches):
    rows = []
    for br in branches:
        for param, root in br.samples:
            rows.append((param, br.index, root))
    rows.sort(key=lambda t: (t[0], t[1]))
    return [_row(param, idx, r.s, r.mu, r.residual, r.source)
            for param, idx, r in rows]


def _events_doc(branches):
    events = []
    seen = set()
    for br in branches:
        for ev in br.events:
            key = (ev.param, ev.branch_ids)
            if key in seen:
                continue
            seen.add(key)
            events.append({"param": ev.param, "s_merged": ev.s_merged,
                           "branches": list(ev.branch_ids),
                           "seed": [ev.seed.real, ev.seed.imag]})
    events.sort(key=lambda e: e["param"])
    return events


def cmd_trace(cfg: RunConfig) -> int:
    name, start, stop, step = cfg.sweep
    values = np.arange(start, stop + step / 2, step)
    scan = _scan_for(cfg)
    branches = trace_parameter(_family(cfg.params, name), name, values, scan)
    _emit(_trace_rows(branches), cfg, _meta(cfg))
    events = _events_doc(branches)
    if cfg.output:
        side = cfg.output + ".events.json"
        with open(side, "w") as fh:
            json.dump({"events": events}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif events:
        print(json.dumps({"events": events}, sort_keys=True), file=sys.stderr)
    return 0


FIGURE_TASKS = {
    # name: list of (suffix, command-like spec)
    "1": [(f"k{k}", {"params": dict(k=k, eps=0.0, x0=0.3, M=150),
                     "sweep": ("x0", 0.3, 0.99, 0.01),
                     "s_max": 12.0}) for k in (1, 3, 5)],
    "2": [(f"k{k}", {"params": dict(k=k, eps=0.0, x0=0.9, M=150),
                     "sweep": ("M", 25, 300, 25),
                     "s_max": 10.0}) for k in (1, 5)],
    "3": [(f"k{k}", {"params": dict(k=k, eps=0.0, x0=0.9, M=150),
                     "spectrum": True, "s_max": 12.0, "param": k})
          for k in range(1, 7)],
    "4": [(f"k{k}", {"params": dict(k=k, eps=0.0, x0=0.9, M=150),
                     "sweep": ("eps", 0.0, 12.0, 0.1),
                     "s_max": 10.0}) for k in (1, 3)],
    "5": [(f"k{k}", {"params": dict(k=k, eps=0.0, x0=0.9, M=150),
                     "sweep": ("eps", 0.0, 12.0, 0.1),
                     "s_max": 10.0, "complex_only": True}) for k in (1, 3)],
    "6": [("k0", {"params": dict(k=0, eps=1.0, x0=0.5, M=100),
                  "sweep": ("x0", 0.5, 0.97, 0.01), "s_max": 10.0})],
    "7": [(f"M{M}", {"params": dict(k=0, eps=4.0, x0=0.5, M=M),
                     "sweep": ("x0", 0.5, 0.97, 0.01), "s_max": 10.0})
          for M in (100, 1000)],
}


def _figure_task(cfg: RunConfig, fig: str, suffix: str, spec: dict):
    params = SpectralParams(**spec["params"])
    scan = replace(cfg.scan, s_max=spec.get("s_max", cfg.scan.s_max))
    if params.k == 0 and scan.s_min <= 0.0:
        scan = replace(scan, s_min=scan.step)
    base = cfg.output or f"figure{fig}"
    out = f"{base}_{suffix}.{cfg.fmt}"
    meta = _meta(cfg) | {"figure": fig, "series": suffix,
                         "params": dataclasses.asdict(params)}
    if spec.get("spectrum"):
        roots = scan_real_roots(boundary.det_functional(params), scan)
        rows = _filter_rows(roots, spec.get("param", params.x0),
                            scan.tol * 10, "series")
        text = _render(rows, cfg.fmt, meta)
        with open(out, "w", newline="") as fh:
            fh.write(text)
        return out
    name, start, stop, step = spec["sweep"]
    values = np.arange(start, stop + step / 2, step)
    branches = trace_parameter(_family(params, name), name, values, scan)
    rows = _trace_rows(branches)
    if spec.get("complex_only"):
        rows = [r for r in rows if r["im_s"] != "0"]
    text = _render(rows, cfg.fmt, meta)
    with open(out, "w", newline="") as fh:
        fh.write(text)
    events = _events_doc(branches)
    with open(out + ".events.json", "w") as fh:
        json.dump({"events": events}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def cmd_figures(cfg: RunConfig, figure: str) -> int:
    keys = list(FIGURE_TASKS) if figure == "all" else [figure]
    tasks = []
    for key in keys:
        if key not in FIGURE_TASKS:
            raise ValueError(f"unknown figure {key!r}; choose from "
                             f"{sorted(FIGURE_TASKS)} or 'all'")
        tasks += [(key, suffix, spec) for suffix, spec in FIGURE_TASKS[key]]
    with ThreadPoolExecutor(max_workers=verify.thread_cap()) as pool:
        outs = list(pool.map(
            lambda t: _figure_task(cfg, t[0], t[1], t[2]), tasks))
    for out in outs:                      # deterministic task order
        print(f"wrote {out}")
    return 0


def cmd_verify(only: str | None, output: str | None) -> int:
    results = verify.run_checks(only)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status} {r['group']}/{r['name']} ({r['seconds']:.2f}s): "
              f"{r['detail']}")
    doc = {"passed": all(r["passed"] for r in results), "checks": results}
    if output:
        with open(output, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if doc["passed"] else 1


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sphere-spectra",
        description="Eigenvalue spectra of viscous flow perturbations on a "
                    "full or truncated sphere")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spectrum_like=True):
        p.add_argument("--config", help="JSON file with default options")
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--x0", type=float, default=None)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--smin", type=float, default=None)
        p.add_argument("--smax", type=float, default=None)
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default=None)

    sp = sub.add_parser("spectrum", help="series-determinant root table")
    common(sp)
    so = sub.add_parser("oracle", help="shooting-oracle root table")
    common(so)
    so.add_argument("--steps", type=int, default=None,
                    help="RK4 step count (default 2000)")
    so.add_argument("--chi", action="store_true",
                    help="transformed self-adjoint problem instead of the "
                         "k-indexed system")
    st = sub.add_parser("trace", help="parameter sweep with branch tracking")
    common(st)
    st.add_argument("--sweep", required=True,
                    help="name:start:stop:step with name one of x0, eps, M")
    sf = sub.add_parser("figures", help="emit canned figure datasets")
    common(sf)
    sf.add_argument("--figure", default="1",
                    help="figure number (1-7) or 'all'")
    sv = sub.add_parser("verify", help="run the self-verification suite")
    sv.add_argument("--only", default=None,
                    help="restrict to one group or check name")
    sv.add_argument("--output", default=None, help="JSON report path")
    return ap


_DEFAULTS = {"k": 1, "eps": 0.0, "x0": 0.9, "smin": 0.0, "smax": 8.0,
             "step": 0.05, "tol": 1e-10, "fmt": "csv", "steps": 2000}


def _merge_config(args) -> dict:
    """File values fill unset flags; flags win."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            merged.update(json.load(fh))
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config"):
            merged[key] = val
    return merged


def _parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError("sweep must be name:start:stop:step")
    return parts[0], float(parts[1]), float(parts[2]), float(parts[3])


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.only, args.output)
    try:
        opts = _merge_config(args)
        default_M = 100 if opts["k"] == 0 else 150
        M = int(opts.get("M") or default_M)
        if M > 2000:
            raise ValueError("M is capped at 2000")
        params = SpectralParams(k=int(opts["k"]), eps=float(opts["eps"]),
                                x0=float(opts["x0"]), M=M)
        if params.x0 > 0.95 and M > 500:
            print("warning: convergence is slow for x0 > 0.95; large M "
                  "mostly adds rounding noise", file=sys.stderr)
        scan = ScanConfig(s_min=float(opts["smin"]), s_max=float(opts["smax"]),
                          step=float(opts["step"]), tol=float(opts["tol"]))
        sweep = None
        if args.command == "trace":
            sweep = _parse_sweep(opts["sweep"])
        elif args.command == "figures":
            # placeholder satisfying the config invariant; every figure
            # preset carries its own sweep
            sweep = ("x0", 0.0, 1.0, 1.0)
        cfg = RunConfig(command=args.command, params=params, scan=scan,
                        sweep=sweep, output=opts.get("output"),
                        fmt=opts["fmt"], n_steps=int(opts.get("steps", 2000)),
                        chi=bool(getattr(args, "chi", False)))
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "oracle":
            return cmd_oracle(cfg)
        if args.command == "trace":
            return cmd_trace(cfg)
        if args.command == "figures":
            return cmd_figures(cfg, str(args.figure))
        raise AssertionError(args.command)
    except NonFiniteError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
