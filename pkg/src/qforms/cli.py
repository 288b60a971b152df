"""Command-line front end: identity sweeps and tables written as canonical JSON or CSV reports."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

from . import cg, forms, qcalc, rank2
from .coeff import KElem, ParseError, parse_kelem

WORKERS_ENV = "QFORMS_WORKERS"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    m_max: int
    n_max: int
    depth: int
    series_order: int
    output: str = "json"
    output_path: str | None = None
    seed: int = 0

    def validate(self) -> None:
        for name in ("m_max", "n_max", "depth", "series_order"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")
        if self.series_order < 2:
            raise UsageError("series_order must be at least 2")
        if self.output not in ("json", "csv"):
            raise UsageError("output must be json or csv")


# Defaults follow the acceptance scales: (m_max, n_max, depth, series_order).
DEFAULTS = {
    "qcheck": (8, 10, 6, 6),
    "cg": (4, 4, 0, 2),
    "gram": (2, 2, 3, 2),
    "sharp-verify": (2, 2, 3, 2),
    "cgid": (6, 6, 0, 2),
    "filtration": (5, 5, 0, 2),
    "diagonalize": (4, 4, 0, 2),
    "gamma": (4, 4, 0, 8),
    "decompose": (4, 4, 0, 2),
    "rank2-sl3": (0, 0, 0, 2),
    "rank2-sp4": (0, 0, 0, 2),
}


# ---------------------------------------------------------------------------
# Sweep items: (kind, params) -> record with an "ok" flag
# ---------------------------------------------------------------------------


def _item_qcalc(kind: str, params: tuple) -> dict:
    fn = {
        "gauss": lambda j, variant, zdeg: qcalc.check_gauss(j, variant, zdeg),
        "ma1": qcalc.check_ma1,
        "ma2": qcalc.check_ma2,
        "third_binomial": qcalc.check_third_binomial,
        "chu_vandermonde": qcalc.check_chu_vandermonde,
        "matrixentry": qcalc.check_matrixentry,
    }[kind]
    return fn(*params).record()


def _item_cgid(params: tuple) -> dict:
    m, n, sigma, l, r = params
    ok = forms.check_cg_identity(m, n, sigma, l, r)
    return {"identity": "cg_identity", "params": dict(zip("m n sigma l r".split(), params)), "ok": ok}


def _item_sharp(params: tuple) -> dict:
    m, n, r, depth = params
    res = forms.verify_main_theorem(m, n, r, depth)
    return {"identity": "main_theorem", "params": {"m": m, "n": n, "r": r, "depth": depth},
            "ok": res["ok"], "pairs": res["pairs"]}


def _item_cg(params: tuple) -> dict:
    m, n = params
    rows = []
    ok = True
    for p in range(min(m, n) + 1):
        for k in range(m + n - 2 * p + 1):
            norm, gram = cg.cg_norm(m, n, p, k), cg.cg_norm_gram(m, n, p, k)
            ok &= norm == gram
            coeffs = {f"{i},{j}": str(cg.threej(m, n, p, i, j, k))
                      for i in range(m + 1) for j in range(n + 1) if i + j == p + k}
            rows.append({"p": p, "k": k, "norm": str(norm), "norm_matches_gram": norm == gram,
                         "threej": coeffs})
    return {"identity": "cg_table", "params": {"m": m, "n": n}, "ok": ok, "rows": rows}


def _dispatch(task: tuple) -> dict:
    kind, params = task
    if kind == "cgid":
        return _item_cgid(params)
    if kind == "sharp":
        return _item_sharp(params)
    if kind == "cg":
        return _item_cg(params)
    return _item_qcalc(kind, params)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"{WORKERS_ENV} must be an integer") from exc
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be at least 1")
    return n


def run_tasks(tasks: list) -> list:
    workers = _workers()
    if workers == 1 or len(tasks) < 2:
        return [_dispatch(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_dispatch, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _sweep_report(cfg: RunConfig, tasks: list) -> dict:
    records = run_tasks(tasks)
    keyed = sorted(zip(tasks, records), key=lambda tr: (tr[0][0], tr[0][1]))
    items = [r for _, r in keyed]
    return {"items": items, "failures": [r for r in items if not r["ok"]]}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_qcheck(cfg: RunConfig, args) -> dict:
    tasks = []
    for j in range(13):
        for variant in ("finite", "infinite"):
            tasks.append(("gauss", (j, variant, cfg.series_order)))
    a = cfg.m_max
    for x in range(-a, a + 1):
        for y in range(-a, a + 1):
            for r in range(a + 1):
                for sgn in (1, -1):
                    tasks.append(("ma1", (x, y, r, sgn)))
                    tasks.append(("ma2", (x, y, r, sgn)))
    for n in range(cfg.n_max + 1):
        for k in range(n + 1):
            tasks.append(("third_binomial", (n, k)))
    for r in range(cfg.n_max + 1):
        for k in range(r + 1):
            tasks.append(("chu_vandermonde", (k, r)))
    for r in range(1, cfg.depth + 1):
        tasks.append(("matrixentry", (r,)))
    return _sweep_report(cfg, tasks)


def cmd_cg(cfg: RunConfig, args) -> dict:
    tasks = [("cg", (m, n)) for m in range(cfg.m_max + 1) for n in range(cfg.n_max + 1)]
    return _sweep_report(cfg, tasks)


def cmd_cgid(cfg: RunConfig, args) -> dict:
    tasks = []
    for m in range(cfg.m_max + 1):
        for n in range(cfg.n_max + 1):
            if (m + n) % 2:
                continue
            for sigma in range(n + 1):
                for r in range(abs(m - n) // 2, (m + n) // 2 + 1):
                    for l in range(r + 1):
                        tasks.append(("cgid", (m, n, sigma, l, r)))
    return _sweep_report(cfg, tasks)


def cmd_sharp(cfg: RunConfig, args) -> dict:
    tasks = []
    for m in range(cfg.m_max + 1):
        for n in range(cfg.n_max + 1):
            if (m - n) % 2:
                continue
            for r in range(abs(m - n) // 2, (m + n) // 2 + 1):
                tasks.append(("sharp", (m, n, r, cfg.depth)))
    return _sweep_report(cfg, tasks)


def _gram_block(form: forms.BilinearForm, indices: list) -> list:
    return [[str(x) for x in row] for row in form.gram(indices, indices)]


def cmd_gram(cfg: RunConfig, args) -> dict:
    items = []
    named = [("shapovalov", 0, forms.shapovalov(0)), ("quotient", 0, forms.quotient_form(0))]
    named += [("finite", m, forms.finite_form(m)) for m in range(cfg.m_max + 1)]
    for name, param, form in named:
        basis = form.left.basis(cfg.depth)
        by_weight: dict = {}
        for idx in basis:
            by_weight.setdefault(form.left.weight(idx), []).append(idx)
        blocks = [{"weight": list(w), "basis": [form.left.render_index(i) for i in idx],
                   "gram": _gram_block(form, idx)} for w, idx in sorted(by_weight.items())]
        bad = form.invariance_failures(cfg.depth)
        items.append({"identity": "gram", "params": {"form": name, "lam_or_m": param},
                      "ok": not bad and form.is_symmetric(cfg.depth), "blocks": blocks,
                      "invariance_failures": [list(map(str, b)) for b in bad]})
    for m in range(cfg.m_max + 1):
        for n in range(cfg.n_max + 1):
            if (m - n) % 2:
                continue
            for r in range(abs(m - n) // 2, (m + n) // 2 + 1):
                beta = forms.BetaMap(m, n, {r: KElem(1)})
                chi = forms.induced_form(beta, forms.shapovalov(0))
                lefts = sorted(chi.left.basis(min(cfg.depth, 2)))
                rights = sorted(chi.right.basis(min(cfg.depth, 2)))
                vals = {f"{a}|{b}": str(chi.pair_basis(a, b)) for a in lefts for b in rights
                        if chi.pair_basis(a, b)}
                items.append({"identity": "induced_gram", "params": {"m": m, "n": n, "r": r},
                              "ok": True, "nonzero_entries": vals})
    items.sort(key=lambda it: json.dumps(it["params"], sort_keys=True))
    return {"items": items, "failures": [it for it in items if not it["ok"]]}


def random_r_element(rng: random.Random, order: int) -> KElem:
    """(T - 1)^order times a random unit of R."""
    unit = KElem(0)
    while not unit or forms.ord_T1(unit) != 0:
        terms = {(rng.randint(-2, 2), rng.randint(-2, 2)): rng.randint(-3, 3) for _ in range(3)}
        unit = KElem.from_terms({k: c for k, c in terms.items() if c}) if any(terms.values()) else KElem(0)
    return forms.PI ** order * unit


def _filtration_record(bp: KElem, bm: KElem) -> dict:
    name, case = forms.filtration_case(bp, bm)
    direct = forms.filtration_direct(bp, bm)
    return {"b_plus": str(bp), "b_minus": str(bm), "case": name, "type": case.to_json(),
            "direct": direct.to_json(), "ok": case == direct}


def cmd_filtration(cfg: RunConfig, args) -> dict:
    try:
        if args.b_plus is not None or args.b_minus is not None:
            if args.b_plus is None or args.b_minus is None:
                raise UsageError("--b-plus and --b-minus go together")
            items = [_filtration_record(parse_kelem(args.b_plus), parse_kelem(args.b_minus))]
        else:
            rng = random.Random(cfg.seed)
            items = []
            for _ in range(args.count):
                bp = random_r_element(rng, rng.randint(0, cfg.m_max))
                bm = random_r_element(rng, rng.randint(0, cfg.m_max))
                if rng.random() < 0.3:
                    bm = -bp + random_r_element(rng, forms.ord_T1(bp) + rng.randint(1, 2))
                items.append(_filtration_record(bp, bm))
    except (forms.NotInR, forms.BothZero) as exc:
        raise UsageError(str(exc)) from exc
    return {"items": items, "failures": [it for it in items if not it["ok"]]}


def random_r_matrix(rng: random.Random, n: int, max_order: int = 3) -> list:
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            row.append(KElem(0) if rng.random() < 0.15 else random_r_element(rng, rng.randint(0, max_order)))
        rows.append(row)
    return rows


def _diag_record(gram: list, symmetric: bool) -> dict:
    d = forms.diagonalize_form(gram, symmetric=symmetric)
    product = forms.mat_mul(forms.mat_mul(d.U, gram), d.V)
    units_ok = forms.is_unit(forms.mat_det(d.U)) and forms.is_unit(forms.mat_det(d.V))
    rec = d.to_json()
    rec.update({"symmetric": symmetric, "reconstructs": product == d.D, "unit_transforms": units_ok})
    if symmetric:
        rec["units_valid"] = all(forms.is_unit(u) for u in d.units)
    rec["ok"] = rec["reconstructs"] and units_ok and rec.get("units_valid", True)
    return rec


def cmd_diagonalize(cfg: RunConfig, args) -> dict:
    try:
        if args.matrix_file:
            with open(args.matrix_file, encoding="utf-8") as fh:
                raw = json.load(fh)
            gram = [[parse_kelem(str(x)) for x in row] for row in raw]
            items = [_diag_record(gram, args.symmetric)]
        else:
            rng = random.Random(cfg.seed)
            items = []
            for _ in range(args.count):
                gram = random_r_matrix(rng, cfg.m_max)
                if args.symmetric:
                    gram = [[gram[i][j] if i <= j else gram[j][i] for j in range(len(gram))]
                            for i in range(len(gram))]
                items.append(_diag_record(gram, args.symmetric))
    except (OSError, json.JSONDecodeError, forms.NotInR) as exc:
        raise UsageError(str(exc)) from exc
    return {"items": items, "failures": [it for it in items if not it["ok"]]}


def cmd_gamma(cfg: RunConfig, args) -> dict:
    items = []
    for r in range(1, cfg.m_max + 1):
        data = forms.gamma_constants(r, cfg.series_order)
        rec = data.to_json()
        rec["ok"] = all(rec["checks"].values())
        items.append(rec)
    return {"items": items, "failures": [{"r": it["r"], "failed": sorted(k for k, v in it["checks"].items() if not v)}
                                         for it in items if not it["ok"]]}


def cmd_decompose(cfg: RunConfig, args) -> dict:
    dims = [int(x) for x in args.finite.split(",")] if args.finite else list(range(cfg.n_max + 1))
    try:
        summands = forms.orthogonal_decomposition(dims, args.sharp_sign)
    except forms.NotSelfSharp as exc:
        raise UsageError(str(exc)) from exc
    items = []
    for s in summands:
        rec = s.to_json()
        certs = s.certificates
        if s.kind == "P":
            rec["ok"] = all(certs[k] for k in ("block_projector_integral", "non_split",
                                                "orthogonal_to_other_blocks", "transition_unit",
                                                "gram_matches_weight_space_matrix", "case_matches_direct"))
        else:
            rec["ok"] = certs["highest_weight"]
        items.append(rec)
    return {"items": items, "failures": [it for it in items if not it["ok"]]}


def cmd_rank2(case: str) -> Callable:
    def run(cfg: RunConfig, args) -> dict:
        report = rank2.rank2_report(case)
        failures = [s["variant"] for s in report["solutions"] if not s["residual_zero"]]
        return {"items": [report], "failures": failures}
    return run


COMMANDS = {
    "qcheck": cmd_qcheck,
    "cg": cmd_cg,
    "gram": cmd_gram,
    "sharp-verify": cmd_sharp,
    "cgid": cmd_cgid,
    "filtration": cmd_filtration,
    "diagonalize": cmd_diagonalize,
    "gamma": cmd_gamma,
    "decompose": cmd_decompose,
    "rank2-sl3": cmd_rank2("sl3"),
    "rank2-sp4": cmd_rank2("sp4"),
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    if isinstance(obj, bool):
        return [(prefix, "true" if obj else "false")]
    return [(prefix, "null" if obj is None else str(obj))]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", "value"])
    writer.writerows(_flatten(report))
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qforms", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--m-max", type=int)
        p.add_argument("--n-max", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--series-order", type=int)
        p.add_argument("--output", choices=("json", "csv"), default="json")
        p.add_argument("--output-path")
        p.add_argument("--seed", type=int, default=0)
        if name == "filtration":
            p.add_argument("--b-plus")
            p.add_argument("--b-minus")
            p.add_argument("--count", type=int, default=200)
        if name == "diagonalize":
            p.add_argument("--matrix-file")
            p.add_argument("--symmetric", action="store_true")
            p.add_argument("--count", type=int, default=100)
        if name == "decompose":
            p.add_argument("--finite", help="comma-separated dimensions n_j of the F_n summands")
            p.add_argument("--sharp-sign", type=int)
    return parser


def config_from_args(args) -> RunConfig:
    dm, dn, dd, ds = DEFAULTS[args.command]
    pick = lambda v, d: d if v is None else v  # noqa: E731
    cfg = RunConfig(args.command, pick(args.m_max, dm), pick(args.n_max, dn), pick(args.depth, dd),
                    pick(args.series_order, ds), args.output, args.output_path, args.seed)
    cfg.validate()
    return cfg


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        body = COMMANDS[cfg.command](cfg, args)
    except (UsageError, ParseError, forms.BadRange, cg.BadRange, qcalc.Unsupported) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"command": cfg.command, "config": asdict(cfg), **body}
    report["config"].pop("output_path")
    report["passed"] = not body["failures"]
    text = render(report, cfg.output)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
