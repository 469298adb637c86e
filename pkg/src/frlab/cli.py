"""Command-line entry point: ``frlab <group> <command> [options]``.

Exit codes: 0 computed / checks passed, 1 a check failed (witness in the
report), 2 unresolved at the given bounds, 3 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import re
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_UNRESOLVED, EXIT_INPUT = 0, 1, 2, 3
SCHEMA_DIR = Path(__file__).with_name("schemas")
REPORT_SCHEMA = "frlab.report/1"


class InputError(ValueError):
    """Malformed user input; maps to exit code 3."""


# -- parsing helpers ------------------------------------------------------------------------


def parse_set(text: str | None) -> frozenset:
    if text is None:
        return frozenset()
    body = text.strip().strip("{}").strip()
    if not body:
        return frozenset()
    try:
        return frozenset(int(x) for x in re.split(r"[,\s]+", body) if x)
    except ValueError:
        raise InputError(f"cannot read {text!r} as a set of integers (use 1,2,3)") from None


def parse_perm(text: str, degree: int | None = None) -> tuple:
    """Image list ``1,0,2`` or cycles ``(0 1)(2 3)`` (cycles need a degree)."""
    text = text.strip()
    try:
        if "(" in text:
            cycles = [tuple(int(x) for x in re.split(r"[,\s]+", c.strip()) if x) for c in re.findall(r"\(([^)]*)\)", text)]
            n = degree if degree is not None else 1 + max((x for c in cycles for x in c), default=-1)
            img = list(range(n))
            for c in cycles:
                for i, x in enumerate(c):
                    img[x] = c[(i + 1) % len(c)]
            perm = tuple(img)
        else:
            perm = tuple(int(x) for x in re.split(r"[,\s]+", text) if x)
    except (ValueError, IndexError):
        raise InputError(f"cannot read {text!r} as a permutation") from None
    if sorted(perm) != list(range(len(perm))):
        raise InputError(f"{text!r} is not a bijection of 0..{len(perm) - 1}")
    return perm


def parse_sigma(text: str) -> dict:
    """Color permutation as ``0:1,1:0`` or cycles ``(0 1 2)``."""
    text = text.strip()
    if "(" in text:
        p = parse_perm(text)
        return {i: p[i] for i in range(len(p)) if p[i] != i}
    try:
        pairs = [tuple(int(x) for x in item.split(":")) for item in text.split(",") if item.strip()]
        sigma = {a: b for a, b in pairs}
    except ValueError:
        raise InputError(f"cannot read {text!r} as a color map (use 0:1,1:0)") from None
    if sorted(sigma) != sorted(sigma.values()):
        raise InputError("sigma must be a bijection on its support")
    return sigma


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


def validate_doc(doc, schema_name: str, where: str = "input"):
    import jsonschema

    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise InputError(f"{where}: schema {schema_name} violated at {pointer}: {e.message}")


# -- instances and classes ------------------------------------------------------------------


def load_instance(builtin: str | None = None, path: str | None = None, budget: int = 64, depth: int = 4):
    """A builtin name or a JSON instance document, validated."""
    from .catalog import UnknownBuiltin, builtin_instance
    from .fraisse import FraisseClassSpec
    from .groups import GroupError, PermGroup
    from .instance import ExtendableInstance, FixedInstance
    from .structures import FinStructure, StructureError

    if builtin:
        try:
            return builtin_instance(builtin, growth_budget=budget, depth=depth)
        except UnknownBuiltin as exc:
            raise InputError(exc.args[0]) from None
    if not path:
        raise InputError("give an instance with --builtin NAME or --instance PATH")
    doc = _load_json(path)
    validate_doc(doc, "instance", path)
    if "group" in doc:
        n = doc["group"]["domain_size"]
        for i, gen in enumerate(doc["group"]["generators"]):
            if sorted(gen) != list(range(n)):
                raise InputError(f"{path}: /group/generators/{i}: {gen} is not a bijection of 0..{n - 1}")
    try:
        if doc["kind"] == "fixed":
            structure = FinStructure.from_json(doc["structure"]) if "structure" in doc else None
            if "group" in doc:
                return FixedInstance(PermGroup.from_json(doc["group"]), structure, name=doc.get("name", Path(path).stem))
            return FixedInstance.of_structure(structure, name=doc.get("name", Path(path).stem))
        spec = FraisseClassSpec.from_json(doc["spec"])
        return ExtendableInstance.seeded(spec, doc.get("n_initial", 8), doc.get("ext_depth", 2), budget, depth, name=doc.get("name", ""))
    except (GroupError, StructureError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_spec(builtin: str | None, path: str | None):
    from .fraisse import BUILTINS, FraisseClassSpec
    from .structures import StructureError

    if builtin:
        if builtin not in BUILTINS:
            raise InputError(f"unknown class {builtin!r}; builtin classes: {', '.join(BUILTINS)}")
        return FraisseClassSpec.builtin(builtin)
    if not path:
        raise InputError("give a class with --builtin NAME or --class-file PATH")
    doc = _load_json(path)
    validate_doc(doc, "class", path)
    try:
        return FraisseClassSpec.from_json(doc)
    except StructureError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_structure(path: str):
    from .structures import FinStructure, StructureError

    doc = _load_json(path)
    validate_doc(doc, "structure", path)
    try:
        return FinStructure.from_json(doc)
    except StructureError as exc:
        raise InputError(f"{path}: {exc}") from None


# -- reports ------------------------------------------------------------------------------


def _jsonable(x):
    if hasattr(x, "to_json"):
        return _jsonable(x.to_json())
    if isinstance(x, (set, frozenset)):
        return sorted((_jsonable(v) for v in x), key=repr)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def make_report(command: str, inputs: dict, status: str, result, witness=None, tsv: str | None = None) -> dict:
    rep = {
        "schema": REPORT_SCHEMA,
        "tool": "frlab",
        "version": __version__,
        "command": command,
        "inputs": _jsonable(inputs),
        "status": status,
        "exit_code": {"ok": EXIT_OK, "fail": EXIT_FAIL, "unresolved": EXIT_UNRESOLVED}[status],
        "result": _jsonable(result),
    }
    if witness is not None:
        rep["witness"] = _jsonable(witness)
    if tsv is not None:
        rep["tsv"] = tsv
    return rep


def _status_of(verdicts) -> str:
    if any(v.fails for v in verdicts):
        return "fail"
    if any(v.unresolved for v in verdicts):
        return "unresolved"
    return "ok"


def render_text(rep: dict) -> str:
    lines = [f"{rep['command']}: {rep['status']}"]
    res = rep["result"]
    if isinstance(res, dict):
        for k, v in res.items():
            if isinstance(v, (dict, list)) and len(json.dumps(v)) > 160:
                v = json.dumps(v)[:157] + "..."
            lines.append(f"  {k}: {v}")
    else:
        lines.append(f"  {res}")
    if "witness" in rep:
        lines.append("  witness: " + json.dumps(rep["witness"], sort_keys=True))
    if rep.get("tsv"):
        lines.append(rep["tsv"].rstrip("\n"))
    return "\n".join(lines)


def render_tsv(rep: dict) -> str:
    if rep.get("tsv"):
        return rep["tsv"].rstrip("\n")
    rows = ["key\tvalue", f"status\t{rep['status']}"]
    res = rep["result"]
    if isinstance(res, dict):
        for k, v in res.items():
            rows.append(f"{k}\t{json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}")
    if "witness" in rep:
        rows.append(f"witness\t{json.dumps(rep['witness'], sort_keys=True)}")
    return "\n".join(rows)


# -- cache --------------------------------------------------------------------------------


def cache_dir(args) -> Path:
    if getattr(args, "cache_dir", None):
        return Path(args.cache_dir)
    env = os.environ.get("FRLAB_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "frlab"


def cache_key(command: str, inputs: dict) -> str:
    canon = json.dumps({"v": __version__, "command": command, "inputs": _jsonable(inputs)}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def cache_get(args, key: str):
    path = cache_dir(args) / f"{key}.json"
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    return doc if doc.get("version") == __version__ else None


def cache_put(args, key: str, rep: dict):
    d = cache_dir(args)
    try:
        d.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile("w", dir=d, delete=False, suffix=".tmp") as fh:
            json.dump(rep, fh, sort_keys=True)
            tmp = fh.name
        os.replace(tmp, d / f"{key}.json")
    except OSError:
        pass  # caching is best effort


# -- command implementations ------------------------------------------------------------
# Each returns (report, figure_callback or None).


def _inst_inputs(args) -> dict:
    return {"builtin": args.builtin, "instance": args.instance}


def cmd_structure_validate(args):
    from .groups import automorphism_group

    M = load_structure(args.structure)
    res = {"size": M.size, "signature": [[n, a] for n, a in M.signature.relations], "rows": {n: len(M.tables[n]) for n in M.signature.names}}
    res["automorphism_group_order"] = automorphism_group(M).order()
    return make_report("structure validate", {"structure": args.structure}, "ok", res), None


def cmd_structure_auts(args):
    from .groups import automorphism_group, fmt_cycles

    M = load_structure(args.structure) if args.structure else _instance_structure(args)
    G = automorphism_group(M)
    orbits = sorted({tuple(sorted(o)) for o in G.orbit_partition().values()})
    res = {"order": G.order(), "generators": [fmt_cycles(g) for g in G.generators], "orbits": orbits}
    return make_report("structure auts", {"structure": args.structure, "builtin": args.builtin}, "ok", res), None


def _instance_structure(args):
    inst = load_instance(args.builtin, args.instance)
    M = getattr(inst, "structure", None)
    if M is None:
        raise InputError("this instance carries no structure; pass --structure PATH")
    return M


def cmd_structure_ultrahom(args):
    from .groups import automorphism_group
    from .structures import ultrahomogenize

    M = load_structure(args.structure) if args.structure else _instance_structure(args)
    U = ultrahomogenize(M, args.arity_cap)
    same = automorphism_group(M).order() == automorphism_group(U).order()
    res = {"relations": len(U.signature.relations), "automorphism_group_preserved": same, "structure": U.to_json()}
    return make_report("structure ultrahom", {"structure": args.structure, "builtin": args.builtin, "arity_cap": args.arity_cap}, "ok" if same else "fail", res), None


def cmd_group_orbit(args):
    inst = load_instance(args.builtin, args.instance)
    B = parse_set(args.over)
    _check_points(inst, {args.point} | B)
    orb = inst.orbit_over(args.point, B)
    return make_report("group orbit", {**_inst_inputs(args), "point": args.point, "over": B}, "ok", {"orbit": orb, "size": len(orb)}), None


def cmd_group_stab(args):
    from .groups import fmt_cycles, stabilizer

    inst = load_instance(args.builtin, args.instance)
    if inst.kind != "fixed":
        raise InputError("stabilizer subgroups are computed on fixed instances")
    B = parse_set(args.set)
    _check_points(inst, B)
    H = stabilizer(inst.group, B, args.mode)
    res = {"order": H.order(), "generators": [fmt_cycles(g) for g in H.generators]}
    return make_report("group stab", {**_inst_inputs(args), "set": B, "mode": args.mode}, "ok", res), None


def _check_points(inst, pts):
    bad = [p for p in pts if not 0 <= p < inst.size]
    if bad:
        raise InputError(f"points {sorted(bad)} lie outside the universe 0..{inst.size - 1}")


def _closure(args, inst):
    from .closure import catalog_closure

    try:
        return catalog_closure(args.closure, inst)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None


def cmd_closure_check(args):
    from .closure import FORMS, is_disjointifying, is_invariant, validate_closure

    inst = load_instance(args.builtin, args.instance, budget=args.witness_search)
    cl = _closure(args, inst)
    forms = FORMS if args.form == "all" else (int(args.form),)
    axioms = validate_closure(cl)
    inv = is_invariant(cl)
    verdicts = {f: is_disjointifying(cl, f, args.set_size, args.witness_search) for f in forms}
    allv = [axioms, inv, *verdicts.values()]
    status = _status_of(allv)
    witness = None
    for label, v in [("axioms", axioms), ("invariance", inv)] + [(f"form{f}", v) for f, v in verdicts.items()]:
        if v.fails:
            witness = {"kind": "closure-form" if label.startswith("form") else f"closure-{label}", **v.witness}
            break
    res = {"closure_axioms": axioms, "invariant": inv, "disjointifying": {f"form{f}": v for f, v in verdicts.items()}}
    inputs = {**_inst_inputs(args), "closure": args.closure, "form": args.form, "set_size": args.set_size, "witness_search": args.witness_search}
    return make_report("closure check", inputs, status, res, witness), None


def cmd_closure_forms(args):
    from .closure import FORMS, is_disjointifying

    inst = load_instance(args.builtin, args.instance, budget=args.witness_search)
    cl = _closure(args, inst)
    verdicts = {f"form{f}": is_disjointifying(cl, f, args.set_size, args.witness_search) for f in FORMS}
    labels = {k: v.status for k, v in verdicts.items()}
    agree = len(set(labels.values())) == 1
    res = {"forms": verdicts, "agree": agree}
    status = "ok" if agree else "fail"
    witness = None if agree else {"kind": "forms-disagree", "verdicts": labels}
    inputs = {**_inst_inputs(args), "closure": args.closure, "set_size": args.set_size, "witness_search": args.witness_search}
    return make_report("closure forms", inputs, status, res, witness), None


def cmd_closure_enumerate(args):
    from .closure import DomainTooLarge, enumerate_invariant_closures, is_disjointifying

    inst = load_instance(args.builtin, args.instance)
    if inst.kind != "fixed":
        raise InputError("enumeration needs a fixed instance")
    try:
        ops = list(enumerate_invariant_closures(inst.group, args.max_domain, getattr(inst, "structure", None)))
    except DomainTooLarge as exc:
        raise InputError(str(exc)) from None
    rows = []
    for cl in ops:
        rows.append({"name": cl.name, "closed_sets": cl.params["closed_sets"], "disjointifying": is_disjointifying(cl, 4).status})
    by_size = {}
    for r in rows:
        by_size[len(r["closed_sets"])] = by_size.get(len(r["closed_sets"]), 0) + 1
    res = {"count": len(rows), "operators": rows}
    rep = make_report("closure enumerate", {**_inst_inputs(args), "max_domain": args.max_domain}, "ok", res)

    def fig(path):
        from .plots import counts_figure

        counts_figure(dict(sorted(by_size.items())), path, "closed sets", "operators", f"invariant closures on {inst.name}")

    return rep, fig


def _rank_query(args, inst):
    a = args.a
    B = parse_set(args.B)
    _check_points(inst, {a} | B)
    return a, B


def _rank_cmd(args, which: str):
    from .rank import deissler_rank, fmt_set, krk, rank_table

    inst = load_instance(args.builtin, args.instance, depth=args.depth)
    inputs = {**_inst_inputs(args), "depth": args.depth}
    if args.all or which == "table":
        table = rank_table(inst, depth=args.depth)
        cols = ("Drk", "Krk")
        header = "a\tB\t" + "\t".join(cols)
        lines = [header]
        for a, B, d, k in table.rows:
            vals = {"Drk": d, "Krk": k}
            lines.append(f"{a}\t{fmt_set(B)}\t" + "\t".join(str(vals[c]) for c in cols))
        tsv = "\n".join(lines) + "\n"
        unresolved = any(not (d.is_finite or d.tag == "infinite") for _, _, d, _ in table.rows)
        res = {"fingerprint": table.fingerprint, "rows": len(table.rows)}
        rep = make_report(f"rank {which}", {**inputs, "all": True}, "unresolved" if unresolved else "ok", res, tsv=tsv)
        rep["result"]["table"] = table.to_json()["rows"]

        def fig(path):
            from .plots import rank_table_figure

            rank_table_figure(table, path, f"{inst.name}")

        return rep, fig
    if args.a is None:
        raise InputError("give --a POINT (and optionally --B SET) or --all")
    a, B = _rank_query(args, inst)
    fn = deissler_rank if which == "drk" else krk
    v = fn(inst, a, B, args.depth)
    status = "ok" if v.tag != "unresolved" else "unresolved"
    tsv = f"a\tB\t{which.capitalize()}\n{a}\t{fmt_set(B)}\t{v}\n"
    res = {"value": v, "display": str(v)}
    if which == "drk":
        from .rank import dcl, dcl_diagnostic

        res["Dcl"] = dcl(inst, B, args.depth)
        res["Dcl_diagnostic"] = dcl_diagnostic(inst, B, args.depth)
    return make_report(f"rank {which}", {**inputs, "a": a, "B": B}, status, res, tsv=tsv), None


def cmd_rank_certify(args):
    from .rank import CertificateFailed, certify_infinite_rank

    inst = load_instance(args.builtin, args.instance, budget=args.witness_search)
    a, B = _rank_query(args, inst)
    cl = _closure(args, inst)
    inputs = {**_inst_inputs(args), "a": a, "B": B, "closure": args.closure, "set_size": args.set_size, "witness_search": args.witness_search}
    try:
        cert = certify_infinite_rank(inst, a, B, cl, args.set_size, args.witness_search)
    except CertificateFailed as exc:
        c = exc.certificate
        status = "unresolved" if exc.clause == "ii" and c.disjointifying.unresolved else "fail"
        return make_report("rank certify", inputs, status, c, {"kind": "certificate", "failed_clause": exc.clause}), None
    return make_report("rank certify", inputs, "ok", cert), None


def cmd_fraisse_check(args):
    from .fraisse import has_amalgamation

    spec = load_spec(args.builtin, args.class_file)
    v = has_amalgamation(spec, args.bound, args.flavor, args.slack)
    inputs = {"builtin": args.builtin, "class_file": args.class_file, "flavor": args.flavor, "bound": args.bound, "slack": args.slack}
    witness = None
    if not v.ok:
        witness = {"kind": "amalgamation", "spec": spec.to_json(), **v.to_json()}
    return make_report("fraisse check", inputs, "ok" if v.ok else "fail", v, witness), None


def cmd_fraisse_amalgamate(args):
    from .fraisse import amalgamate
    from .structures import FinStructure, StructureError

    spec = load_spec(args.builtin, args.class_file)
    doc = _load_json(args.input)
    validate_doc(doc, "amalgam-input", args.input)
    try:
        A, B, C = (FinStructure.from_json(doc[k]) for k in "ABC")
        f = {int(x): int(y) for x, y in doc["f"]}
        g = {int(x): int(y) for x, y in doc["g"]}
        v = amalgamate(spec, A, B, C, f, g, args.flavor, args.slack)
    except StructureError as exc:
        raise InputError(f"{args.input}: {exc}") from None
    witness = None if v.ok else {"kind": "amalgamation", "spec": spec.to_json(), **v.to_json()}
    inputs = {"builtin": args.builtin, "class_file": args.class_file, "input": args.input, "flavor": args.flavor, "slack": args.slack}
    return make_report("fraisse amalgamate", inputs, "ok" if v.ok else "fail", v, witness), None


def cmd_fraisse_limit(args):
    from .fraisse import build_limit, check_limit_properties

    spec = load_spec(args.builtin, args.class_file)
    build = build_limit(spec, args.n, args.depth, args.seed)
    rep_core = check_limit_properties(build.structure, spec, args.depth, build.core)
    res = {"build": build, "core_size": len(build.core), "core_properties": rep_core}
    status = "ok" if rep_core.clause2_rate == 1.0 else "fail"
    inputs = {"builtin": args.builtin, "class_file": args.class_file, "n": args.n, "depth": args.depth, "seed": args.seed}
    witness = None if status == "ok" else {"kind": "limit", "missing": rep_core.clause2_missing}
    rep = make_report("fraisse limit", inputs, status, res, witness)

    def fig(path):
        from .plots import limit_figure

        rates = {"class membership": rep_core.clause1_rate, "extension": rep_core.clause2_rate, "homogeneity": rep_core.clause3_rate}
        limit_figure(build, rates, path)

    return rep, fig


def cmd_fraisse_verify(args):
    from .fraisse import build_limit, extension_rate, induced_substructure, is_isomorphic

    spec = load_spec(args.builtin, args.class_file)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    runs = []
    cores = []
    for s in seeds:
        build = build_limit(spec, args.n, args.depth, s)
        hit, total = extension_rate(spec, build.structure, args.depth, build.core)
        runs.append({"seed": s, "core": build.core, "extension_realized": hit, "extension_total": total})
        cores.append(induced_substructure(build.structure, build.core)[0])
    iso = all(is_isomorphic(cores[0], c) for c in cores[1:])
    full = all(r["extension_realized"] == r["extension_total"] for r in runs)
    status = "ok" if iso and full else "fail"
    witness = None if status == "ok" else {"kind": "limit-verify", "isomorphic_cores": iso, "full_extension": full}
    inputs = {"builtin": args.builtin, "class_file": args.class_file, "n": args.n, "depth": args.depth, "seeds": seeds}
    return make_report("fraisse verify", inputs, status, {"runs": runs, "cores_isomorphic": iso}, witness), None


def cmd_involve_run(args):
    from .involve import ConditionViolation, run_involvement
    from .verdict import BudgetExhausted

    spec = load_spec(args.builtin, args.class_file)
    sigma = parse_sigma(args.sigma)
    inputs = {"builtin": args.builtin, "closure": args.closure, "sigma": sigma, "stages": args.stages, "budget": args.budget, "palette": args.palette, "lead": args.lead}
    try:
        rep_obj = run_involvement(spec, args.closure, sigma, args.stages, args.budget, args.palette, lead=args.lead)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except ConditionViolation as exc:
        return make_report("involve run", inputs, "fail", {"error": str(exc)}, {"kind": "condition", "condition": exc.condition, "detail": exc.detail}), None
    except BudgetExhausted as exc:
        return make_report("involve run", inputs, "unresolved", {"error": str(exc)}), None
    table = "dom g\t" + "\t".join(str(a) for a in sorted(rep_obj.g)) + "\nim g\t" + "\t".join(str(rep_obj.g[a]) for a in sorted(rep_obj.g)) + "\n"
    rep = make_report("involve run", inputs, "ok" if rep_obj.ok else "fail", rep_obj, tsv=table)

    def fig(path):
        from .plots import involvement_figure

        involvement_figure(rep_obj, path)

    return rep, fig


def cmd_involve_quotient(args):
    from .involve import NotEquivariant, transversal_quotient

    pi = parse_perm(args.pi, args.delta * args.orbits)
    inputs = {"delta": args.delta, "orbits": args.orbits, "pi": pi}
    try:
        sigma = transversal_quotient(args.delta, args.orbits, pi)
    except NotEquivariant as exc:
        return make_report("involve quotient", inputs, "fail", {"error": str(exc)}, {"kind": "not-equivariant", "pi": pi}), None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return make_report("involve quotient", inputs, "ok", {"sigma": sigma}), None


def _support(args, inst):
    from . import support

    table = {"constant-empty": support.constant_empty, "constant-zero": support.constant_zero, "pair-index": support.pair_index}
    if args.supp not in table:
        raise InputError(f"unknown support function {args.supp!r}; choose from {sorted(table)}")
    return table[args.supp](inst)


def cmd_support_axioms(args):
    from .support import check_support_axioms

    inst = load_instance(args.builtin, args.instance, budget=args.budget)
    supp = _support(args, inst)
    which = (1, 2, 3) if args.axiom == "all" else (int(args.axiom),)
    verdicts = {w: check_support_axioms(supp.on(inst.fork() if inst.kind == "extendable" else inst), w, args.set_size, args.budget) for w in which}
    status = _status_of(verdicts.values())
    witness = next(({"kind": "support-axiom", "axiom": w, **v.witness} for w, v in verdicts.items() if v.fails), None)
    inputs = {**_inst_inputs(args), "supp": args.supp, "axiom": args.axiom, "set_size": args.set_size, "budget": args.budget}
    rep = make_report("support axioms", inputs, status, {f"axiom{w}": v for w, v in verdicts.items()}, witness)

    def fig(path):
        from .plots import support_figure

        support_figure(list(verdicts.values()), path, f"{args.supp} on {inst.name}")

    return rep, fig


def cmd_support_compat(args):
    from .support import check_support_rank_compat

    inst = load_instance(args.builtin, args.instance)
    supp = _support(args, inst)
    res = check_support_rank_compat(supp, inst, args.depth, args.set_size)
    witness = {"kind": "support-compat", **res["violations"][0]} if res["violations"] else None
    inputs = {**_inst_inputs(args), "supp": args.supp, "depth": args.depth, "set_size": args.set_size}
    return make_report("support compat", inputs, "ok" if res["ok"] else "fail", res, witness), None


def cmd_support_decompose(args):
    from .groups import fmt_cycles
    from .support import DomainTooSmall, decompose_permutation

    pi = parse_perm(args.pi, args.degree)
    u, v = parse_set(args.u), parse_set(args.v)
    W = parse_set(args.W) if args.W else frozenset(i for i in range(len(pi)) if pi[i] != i) | u | v
    inputs = {"pi": pi, "u": u, "v": v, "W": W}
    try:
        s0, p1, s2 = decompose_permutation(pi, u, v, W)
    except DomainTooSmall as exc:
        return make_report("support decompose", inputs, "fail", {"error": str(exc)}, {"kind": "domain-too-small"}), None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = {"pi0": s0, "pi1": p1, "pi2": s2, "pi0_cycles": fmt_cycles(s0), "pi1_cycles": fmt_cycles(p1)}
    return make_report("support decompose", inputs, "ok", res), None


def cmd_eplus_reduce(args):
    from .support import QPoint, TokenSeq, reduce_EQY_to_eplus, reduce_eplus_to_EQY

    if bool(args.tokens) == bool(args.qpoint):
        raise InputError("give exactly one of --tokens PATH or --qpoint PATH")
    if args.tokens:
        doc = _load_json(args.tokens)
        validate_doc(doc, "tokenseq", args.tokens)
        p = TokenSeq.from_json(doc)
        width = args.width or len(p.range())
        try:
            y = reduce_eplus_to_EQY(p, args.delta, width)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return make_report("eplus reduce", {"tokens": args.tokens, "delta": args.delta, "width": width}, "ok", {"qpoint": y}), None
    doc = _load_json(args.qpoint)
    validate_doc(doc, "qpoint", args.qpoint)
    try:
        y = QPoint.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{args.qpoint}: {exc}") from None
    return make_report("eplus reduce", {"qpoint": args.qpoint}, "ok", {"tokens": reduce_EQY_to_eplus(y)}), None


def cmd_eplus_verify(args):
    from .props import run_suite

    rep_obj = run_suite("bireducibility", args.seed, samples=args.samples)
    return _props_report("eplus verify", rep_obj, {"seed": args.seed, "samples": args.samples})


def _props_report(command, rep_obj, inputs):
    status = {"pass": "ok", "fail": "fail", "unresolved": "unresolved"}[rep_obj.status]
    witness = None
    for r in rep_obj.results:
        if r.failed:
            witness = {"kind": "props", "suite": rep_obj.suite, "property": r.name, "case": r.to_json().get("witness")}
            break
    rep = make_report(command, inputs, status, rep_obj, witness)

    def fig(path):
        from .plots import props_figure

        props_figure(rep_obj, path)

    return rep, fig


def _suite_worker(job):
    from .props import run_suite

    name, seed, bounds = job
    return run_suite(name, seed, **bounds)


def cmd_props_run(args):
    from .props import SUITES, PropsReport, run_suite

    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from all, {', '.join(sorted(SUITES))}")
    bounds = {"samples": args.samples, "count": args.count}
    inputs = {"suite": args.suite, "seed": args.seed, **bounds}
    if args.suite != "all":
        return _props_report("props run", run_suite(args.suite, args.seed, **bounds), inputs)
    jobs = [(name, args.seed, bounds) for name in sorted(SUITES)]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(_suite_worker, jobs))  # map keeps suite order
    else:
        parts = [_suite_worker(j) for j in jobs]
    merged = PropsReport("all", args.seed)
    for part in parts:
        for r in part.results:
            r.name = f"{part.suite}/{r.name}"
            merged.results.append(r)
    return _props_report("props run", merged, inputs)


# -- witness re-check ---------------------------------------------------------------------


def _recheck_closure_form(rep, w) -> bool:
    from .closure import form4_at, indep

    inp = rep["inputs"]
    inst = load_instance(inp.get("builtin"), inp.get("instance"), budget=inp.get("witness_search", 24))
    from .closure import catalog_closure

    cl = catalog_closure(inp["closure"], inst)
    C = frozenset(w["C"])
    form = w["form"]
    if inst.kind != "fixed":
        return None
    if form == 4:
        v = form4_at(cl, w["a"], C)
        return v.fails and v.witness.get("clause") == w.get("clause")
    if form == 1:
        A, B = frozenset(w["A"]), frozenset(w["B"])
        return not any(indep(cl, A2, B, C) for A2 in inst.set_orbit_over(A, C))
    Bset = frozenset(w["B"]) if form == 2 else frozenset([w["b"]])
    return not any(indep(cl, {a2}, Bset, C) for a2 in inst.orbit_over(w["a"], C))


def _recheck_amalgamation(w) -> bool:
    from .fraisse import FraisseClassSpec, amalgamate
    from .structures import FinStructure

    spec = FraisseClassSpec.from_json(w["spec"])
    A, B, C = (FinStructure.from_json(w[k]) for k in "ABC")
    f = {a: b for a, b in w["f"]}
    g = {a: b for a, b in w["g"]}
    return amalgamate(spec, A, B, C, f, g, w["flavor"], w["slack"]).status == "counterexample"


def cmd_verify_witness(args):
    rep = _load_json(args.report)
    if rep.get("schema") != REPORT_SCHEMA:
        raise InputError(f"{args.report}: not a frlab report (schema {rep.get('schema')!r})")
    w = rep.get("witness")
    if w is None:
        raise InputError(f"{args.report}: report carries no witness")
    kind = w.get("kind")
    method = "semantic"
    if kind == "closure-form":
        confirmed = _recheck_closure_form(rep, w)
        if confirmed is None:
            method, confirmed = "rerun", _rerun_matches(rep)
    elif kind == "amalgamation":
        confirmed = _recheck_amalgamation(w)
    else:
        method, confirmed = "rerun", _rerun_matches(rep)
    res = {"witness_kind": kind, "method": method, "confirmed": bool(confirmed), "original_command": rep["command"]}
    return make_report("verify-witness", {"report": args.report}, "ok" if confirmed else "fail", res, None if confirmed else {"kind": "unconfirmed", "witness": w}), None


def _rerun_matches(rep) -> bool:
    argv = rep["command"].split() + _argv_from_inputs(rep["command"], rep["inputs"])
    new, _ = dispatch(build_parser().parse_args(argv + ["--no-cache"]))
    return new.get("witness") == rep.get("witness")


def _argv_from_inputs(command: str, inputs: dict) -> list[str]:
    """Rebuild option flags from a report's inputs block."""
    out = []
    for k, v in inputs.items():
        if v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-") if len(k) > 1 else "--" + k
        if v is True:
            out.append(flag)
        elif isinstance(v, dict):
            out += [flag, ",".join(f"{a}:{b}" for a, b in v.items())]
        elif isinstance(v, list):
            out += [flag, ",".join(map(str, v))]
        else:
            out += [flag, str(v)]
    return out


# -- parser ------------------------------------------------------------------------------


def _add_instance(p):
    p.add_argument("--builtin", help="builtin instance (s3..s7, c3..c6, e2-6, graphs-limit, dlo-limit, pairs-limit, delta-act(k,m))")
    p.add_argument("--instance", help="instance JSON document")


def _add_class(p):
    p.add_argument("--builtin", help="builtin class: graphs, linear_orders, pairs, sets")
    p.add_argument("--class-file", help="class JSON document")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "tsv"), help="default: tsv for rank tables, text otherwise")
    common.add_argument("--output", help="also write the JSON report to this path")
    common.add_argument("--figure", help="render a figure to this path (png, pdf or svg)")
    common.add_argument("--cache-dir", help="cache directory (default $FRLAB_CACHE_DIR or ~/.cache/frlab)")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")

    top = argparse.ArgumentParser(prog="frlab", description="Closure operators, ranks and limits on permutation group actions.")
    top.add_argument("--version", action="version", version=f"frlab {__version__}")
    groups = top.add_subparsers(dest="group", required=True)

    def sub(group_parser, name, fn, help_):
        p = group_parser.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        return p

    g = groups.add_parser("structure", help="finite relational structures").add_subparsers(dest="cmd", required=True)
    p = sub(g, "validate", cmd_structure_validate, "parse and summarize a structure")
    p.add_argument("--structure", required=True)
    for name, fn in (("auts", cmd_structure_auts), ("ultrahom", cmd_structure_ultrahom)):
        p = sub(g, name, fn, "automorphism group" if name == "auts" else "ultrahomogeneous expansion")
        p.add_argument("--structure")
        _add_instance(p)
        if name == "ultrahom":
            p.add_argument("--arity-cap", type=int, default=2)

    g = groups.add_parser("group", help="orbits and stabilizers").add_subparsers(dest="cmd", required=True)
    p = sub(g, "orbit", cmd_group_orbit, "orbit of a point over a set")
    _add_instance(p)
    p.add_argument("--point", type=int, required=True)
    p.add_argument("--over", default="")
    p = sub(g, "stab", cmd_group_stab, "stabilizer of a set")
    _add_instance(p)
    p.add_argument("--set", default="")
    p.add_argument("--mode", choices=("pointwise", "setwise"), default="pointwise")

    g = groups.add_parser("closure", help="closure operators").add_subparsers(dest="cmd", required=True)
    for name, fn in (("check", cmd_closure_check), ("forms", cmd_closure_forms)):
        p = sub(g, name, fn, "axioms, invariance and disjointifying forms" if name == "check" else "compare the four forms")
        _add_instance(p)
        p.add_argument("--closure", default="identity")
        if name == "check":
            p.add_argument("--form", choices=("1", "2", "3", "4", "all"), default="4")
        p.add_argument("--set-size", type=int)
        p.add_argument("--witness-search", type=int, default=24)
    p = sub(g, "enumerate", cmd_closure_enumerate, "all invariant closure operators on a small domain")
    _add_instance(p)
    p.add_argument("--max-domain", type=int, default=4)

    g = groups.add_parser("rank", help="Deissler and disjointifying ranks").add_subparsers(dest="cmd", required=True)
    for name in ("drk", "krk", "table"):
        p = sub(g, name, (lambda w: lambda a: _rank_cmd(a, w))(name), f"{name} values")
        _add_instance(p)
        p.add_argument("--a", type=int)
        p.add_argument("--B", default="")
        p.add_argument("--all", action="store_true")
        p.add_argument("--depth", type=int, default=4)
    p = sub(g, "certify", cmd_rank_certify, "certify Krk(a,B) = inf via a disjointifying closure")
    _add_instance(p)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--B", default="")
    p.add_argument("--closure", default="add-partners")
    p.add_argument("--set-size", type=int, default=3)
    p.add_argument("--witness-search", type=int, default=24)

    g = groups.add_parser("fraisse", help="amalgamation classes and limits").add_subparsers(dest="cmd", required=True)
    p = sub(g, "check", cmd_fraisse_check, "exhaustive amalgamation check")
    _add_class(p)
    p.add_argument("--flavor", choices=("plain", "disjoint"), default="plain")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--slack", type=int, default=0)
    p = sub(g, "amalgamate", cmd_fraisse_amalgamate, "amalgamate one configuration")
    _add_class(p)
    p.add_argument("--input", required=True, help="JSON with A, B, C, f, g")
    p.add_argument("--flavor", choices=("plain", "disjoint"), default="plain")
    p.add_argument("--slack", type=int, default=0)
    for name, fn in (("limit", cmd_fraisse_limit), ("verify", cmd_fraisse_verify)):
        p = sub(g, name, fn, "build a finite approximation" if name == "limit" else "extension property and core isomorphism")
        _add_class(p)
        p.add_argument("--n", type=int, default=24)
        p.add_argument("--depth", type=int, default=3)
        if name == "limit":
            p.add_argument("--seed", type=int, default=0)
        else:
            p.add_argument("--seeds", default="0,1")

    g = groups.add_parser("involve", help="colored back-and-forth").add_subparsers(dest="cmd", required=True)
    p = sub(g, "run", cmd_involve_run, "run the construction for a color permutation")
    _add_class(p)
    p.add_argument("--closure", default="identity", help="identity, add-partners or constant-full")
    p.add_argument("--sigma", default="0:1,1:0")
    p.add_argument("--stages", type=int, default=12)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--palette", type=int, default=8)
    p.add_argument("--lead", choices=("A", "B"), default="A")
    p = sub(g, "quotient", cmd_involve_quotient, "transversal quotient of an equivariant permutation")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--orbits", type=int, required=True)
    p.add_argument("--pi", required=True)

    g = groups.add_parser("support", help="support functions").add_subparsers(dest="cmd", required=True)
    p = sub(g, "axioms", cmd_support_axioms, "check the three support axioms")
    _add_instance(p)
    p.add_argument("--supp", default="pair-index")
    p.add_argument("--axiom", choices=("1", "2", "3", "all"), default="all")
    p.add_argument("--set-size", type=int, default=3)
    p.add_argument("--budget", type=int, default=24)
    p = sub(g, "compat", cmd_support_compat, "supp(aB) = supp(B) when Krk(a,B) is finite")
    _add_instance(p)
    p.add_argument("--supp", default="pair-index")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--set-size", type=int, default=2)
    p = sub(g, "decompose", cmd_support_decompose, "write pi as sigma . pi1 . sigma")
    p.add_argument("--pi", required=True)
    p.add_argument("--degree", type=int)
    p.add_argument("--u", default="")
    p.add_argument("--v", default="")
    p.add_argument("--W")

    g = groups.add_parser("eplus", help="token-scale reductions").add_subparsers(dest="cmd", required=True)
    p = sub(g, "reduce", cmd_eplus_reduce, "apply one reduction")
    p.add_argument("--tokens")
    p.add_argument("--qpoint")
    p.add_argument("--delta", type=int, default=3)
    p.add_argument("--width", type=int)
    p = sub(g, "verify", cmd_eplus_verify, "seeded soundness check of both reductions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)

    g = groups.add_parser("props", help="invariant suites").add_subparsers(dest="cmd", required=True)
    p = sub(g, "run", cmd_props_run, "run one named suite")
    p.add_argument("--suite", required=True, help="suite name, or 'all'")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --suite all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int)
    p.add_argument("--count", type=int)

    p = groups.add_parser("verify-witness", parents=[common], help="re-check the witness in a saved report")
    p.add_argument("report")
    p.set_defaults(fn=cmd_verify_witness)
    return top


_UNCACHED = {cmd_verify_witness}

# global caps on bounds; larger values are rejected as input errors
CAPS = {"set_size": 6, "depth": 8, "witness_search": 512, "budget": 512, "stages": 200, "n": 200, "bound": 6, "slack": 4, "samples": 100_000, "count": 5000, "max_domain": 6, "palette": 64, "jobs": 64, "arity_cap": 3}


def check_caps(args):
    for key, cap in CAPS.items():
        val = getattr(args, key, None)
        if val is None:
            continue
        if val < 0 or val > cap:
            raise InputError(f"--{key.replace('_', '-')} {val} is outside 0..{cap}")
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2**64:
        raise InputError("--seed must be a 64-bit unsigned integer")


def dispatch(args) -> tuple[dict, object]:
    """Run the selected command, consulting the cache when no figure is requested."""
    command = f"{args.group} {args.cmd}" if getattr(args, "cmd", None) else args.group
    check_caps(args)
    use_cache = not args.no_cache and not args.figure and args.fn not in _UNCACHED
    key = None
    if use_cache:
        inputs = {k: v for k, v in vars(args).items() if k not in ("fn", "format", "output", "figure", "cache_dir", "no_cache", "jobs")}
        for k in ("structure", "instance", "class_file", "input", "tokens", "qpoint"):
            if inputs.get(k):
                try:
                    inputs[k + "_sha256"] = hashlib.sha256(Path(inputs[k]).read_bytes()).hexdigest()
                except OSError:
                    pass
        key = cache_key(command, inputs)
        hit = cache_get(args, key)
        if hit is not None:
            return hit, None
    rep, fig = args.fn(args)
    if key is not None:
        cache_put(args, key, rep)
    return rep, fig


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        rep, fig = dispatch(args)
    except InputError as exc:
        print(f"frlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.output:
        Path(args.output).write_text(json.dumps(rep, sort_keys=True, indent=2) + "\n")
    if args.figure and fig is not None:
        fig(args.figure)
    elif args.figure:
        print(f"frlab: {rep['command']} has no figure; nothing written to {args.figure}", file=sys.stderr)
    fmt = args.format or ("tsv" if rep["command"].startswith("rank") and rep.get("tsv") else "text")
    if fmt == "json":
        print(json.dumps(rep, sort_keys=True, indent=2))
    elif fmt == "tsv":
        print(render_tsv(rep))
    else:
        print(render_text(rep))
    return rep["exit_code"]


def run_captured(argv) -> tuple[int, str]:
    """Run ``main`` and capture stdout (used by tests and witness re-checks)."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
