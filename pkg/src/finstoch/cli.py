"""Batch command line over the JSON document formats.

Every subcommand reads files, runs checks, and prints one line per
check: ``PASS <name>`` or ``FAIL <name>``, with ``residual=<value>``
appended for numeric checks (three significant digits).  The exit code
is 0 when every line is PASS, 1 when some check failed, and 2 when an
input could not be read or parsed.  Setting the environment variable
``FINSTOCH_ATOL`` overrides the default tolerance of every check.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from importlib import resources
from typing import Any, Callable, Sequence

from .ci import ci_residual
from .errors import FinstochError, ShapeMismatch
from .exchange import (
    adjacent_transpositions,
    build_ah_joint,
    decode_names,
    grid_transpositions,
    invariance_residual,
    verify_ah_lemmas,
)
from .kernels import (
    DEFAULT_ATOL,
    compose,
    cs_check,
    identity,
    max_abs_diff,
    reindex,
    tensor,
)
from .markov import (
    factorize,
    local_markov_residual,
    ordered_markov_residual,
    recompose,
)
from .models import validate_model, validate_timing
from .quantiles import outsourced_form, pushforward_residual, quantile_pushback
from .semigraphoid import RULES, CIStatement
from .serialization import (
    ahspec_from_json,
    assignment_to_json,
    derivation_from_json,
    kernel_from_json,
    kernel_to_json,
    model_from_json,
    quantile_to_json,
    state_from_json,
    state_to_json,
    timing_from_json,
)

# One reported check: pass/fail, display name, optional residual.
CheckLine = tuple[bool, str, "float | None"]

_GRID_ARG_RE = re.compile(r"^(\d+)x(\d+)$")


def _atol() -> float:
    raw = os.environ.get("FINSTOCH_ATOL")
    if raw is None:
        return DEFAULT_ATOL
    try:
        return float(raw)
    except ValueError:
        raise ShapeMismatch(f"FINSTOCH_ATOL={raw!r} is not a number") from None


def _strict_atol(default: float) -> float:
    """Tolerance for checks whose default is stricter than the global one."""
    return _atol() if "FINSTOCH_ATOL" in os.environ else default


def _read(path: str, loader: Callable, *args) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise FinstochError(f"{path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise FinstochError(f"{path}: not valid JSON ({e})") from e
    try:
        return loader(doc, *args)
    except FinstochError as e:
        raise FinstochError(f"{path}: {e}") from e


def _write_json(path: str, doc: Any) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as e:
        raise FinstochError(f"{path}: {e.strerror or e}") from e


def _wire_list(raw: str, flag: str) -> list[str]:
    """Split a comma-separated wire list; commas inside brackets bind tighter.

    This keeps grid names such as ``S[1,2]`` intact, so
    ``--x S[1,1],S[1,2]`` names two wires.
    """
    items: list[str] = []
    depth = 0
    cur: list[str] = []
    for ch in raw:
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
            continue
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth = max(0, depth - 1)
        cur.append(ch)
    items.append("".join(cur).strip())
    items = [s for s in items if s]
    if not items:
        raise ShapeMismatch(f"{flag} names no wires")
    return items


def _fmt_groups(x, y, given) -> str:
    def fmt(group) -> str:
        return ",".join(sorted(group))

    tail = f"|{fmt(given)}" if given else ""
    return f"{fmt(x)}⊥{fmt(y)}{tail}"


def _emit(lines: Sequence[CheckLine]) -> int:
    if not lines:
        print("PASS (0 checks)")
        return 0
    code = 0
    for ok, name, residual in lines:
        tail = "" if residual is None else f" residual={residual:.3g}"
        print(f"{'PASS' if ok else 'FAIL'} {name}{tail}")
        if not ok:
            code = 1
    return code


def _cmd_validate_model(args) -> list[CheckLine]:
    m = _read(args.model, model_from_json)
    violations = validate_model(m)
    if not violations:
        return [(True, "model-valid", None)]
    return [(False, f"model-valid {v}", None) for v in violations]


def _cmd_check_ci(args) -> list[CheckLine]:
    atol = _atol()
    p = _read(args.state, state_from_json, atol)
    x = _wire_list(args.x, "--x")
    y = _wire_list(args.y, "--y")
    given = _wire_list(args.given, "--given") if args.given else []
    try:
        r = ci_residual(p, x, y, given)
    except FinstochError as e:
        raise FinstochError(f"{args.state}: {e}") from e
    return [(r <= atol, f"ci {_fmt_groups(x, y, given)}", r)]


def _load_state_and_model(args, atol: float):
    p = _read(args.state, state_from_json, atol)
    m = _read(args.model, model_from_json)
    violations = validate_model(m)
    if violations:
        raise FinstochError(f"{args.model}: {violations[0]}")
    if set(p.wire_names) != set(m.wires):
        raise FinstochError(
            f"{args.state}: state wires do not match the wires of {args.model}: "
            f"{sorted(set(p.wire_names) ^ set(m.wires))}"
        )
    t = None
    if getattr(args, "timing", None):
        t = _read(args.timing, timing_from_json)
        try:
            validate_timing(m, t)
        except FinstochError as e:
            raise FinstochError(f"{args.timing}: {e}") from e
    return p, m, t


def _cmd_check_markov(args) -> list[CheckLine]:
    atol = _atol()
    p, m, t = _load_state_and_model(args, atol)
    run_all = not (args.local or args.ordered)
    lines: list[CheckLine] = []
    if args.local or run_all:
        r = local_markov_residual(p, m)
        lines.append((r <= atol, "local-markov", r))
    if args.ordered or run_all:
        r = ordered_markov_residual(p, m, t)
        lines.append((r <= atol, "ordered-markov", r))
    if run_all:
        asg = factorize(p, m, t)
        r = max_abs_diff(reindex(recompose(m, asg), p.wire_names).kernel, p.kernel)
        lines.append((r <= atol, "compatible", r))
    return lines


def _cmd_factorize(args) -> list[CheckLine]:
    atol = _atol()
    p, m, t = _load_state_and_model(args, atol)
    asg = factorize(p, m, t)
    _write_json(args.output, assignment_to_json(asg))
    r = max_abs_diff(reindex(recompose(m, asg), p.wire_names).kernel, p.kernel)
    return [(r <= atol, "factorize-recompose", r)]


def _cmd_build_ah(args) -> list[CheckLine]:
    atol = _atol()
    spec = _read(args.spec, ahspec_from_json, atol)
    p = build_ah_joint(spec, expose_latents=args.expose_latents)
    _write_json(args.output, state_to_json(p))
    return [(True, f"build-ah {len(p.wire_names)} wires", None)]


def _cmd_verify_ah(args) -> list[CheckLine]:
    atol = _atol()
    spec = _read(args.spec, ahspec_from_json, atol)
    report = verify_ah_lemmas(spec, atol)
    r1, r2, r3 = report.residuals
    return [
        (report.entries_independent, "ah-entries-given-tails", r1),
        (report.entry_separated, "ah-entry-vs-unrelated", r2),
        (report.tails_independent, "ah-tails-given-latent", r3),
    ]


def _cmd_check_exchangeable(args) -> list[CheckLine]:
    atol = _atol()
    p = _read(args.state, state_from_json, atol)
    naming = decode_names(p.wire_names)
    if args.grid:
        match = _GRID_ARG_RE.match(args.grid)
        if match:
            want = ("grid", int(match[1]), int(match[2]))
        elif args.grid.isdigit():
            want = ("sequence", int(args.grid), 1)
        else:
            raise ShapeMismatch(f"--grid {args.grid!r} is not MxN or N")
        if (naming.kind, naming.rows, naming.cols) != want:
            raise ShapeMismatch(
                f"--grid {args.grid!r} does not match the "
                f"{naming.rows}x{naming.cols} {naming.kind} of wire names"
            )
    if naming.kind == "grid":
        generators = grid_transpositions(naming.rows, naming.cols)
    else:
        generators = adjacent_transpositions(naming.rows, "sequence")
    lines: list[CheckLine] = []
    for sigma in generators:
        k = next(i for i in range(1, len(sigma.perm) + 1) if sigma(i) != i)
        r = invariance_residual(p, [sigma])
        lines.append((r <= atol, f"exchange {sigma.target}-swap({k},{k + 1})", r))
    return lines


def _resolve_script(path: str) -> str:
    """Fall back to the bundled scripts when the literal path is absent."""
    if os.path.exists(path):
        return path
    bundled = resources.files(__package__) / "scripts" / os.path.basename(path)
    if bundled.is_file():
        return str(bundled)
    raise FinstochError(f"{path}: no such file and no bundled script of that name")


def _cmd_replay(args) -> list[CheckLine]:
    d = _read(_resolve_script(args.derivation), derivation_from_json)
    lines: list[CheckLine] = []
    known: list[CIStatement] = list(d.axioms)
    for k, step in enumerate(d.steps):
        c = step.conclusion
        name = f"step[{k}] {step.rule} {_fmt_groups(c.left, c.right, c.given)}"
        checker = RULES.get(step.rule)
        ok = (
            checker is not None
            and all(0 <= i < len(known) for i in step.premises)
            and checker([known[i] for i in step.premises], c)
        )
        lines.append((ok, name, None))
        if not ok:
            break
        known.append(c)
    return lines


def _cmd_noise_outsource(args) -> list[CheckLine]:
    atol = _atol()
    f = _read(args.kernel, kernel_from_json, atol)
    if len(f.cod) != 1:
        raise FinstochError(f"{args.kernel}: a single codomain factor is required")
    order = (
        _wire_list(args.order, "--order") if args.order else list(f.cod[0].elements)
    )
    qf = quantile_pushback(f, order, atol)
    push_atol = _strict_atol(1e-12)
    r1 = pushforward_residual(qf, f)
    seed, mech = outsourced_form(f, order)
    composite = compose(mech, tensor(seed, identity(f.dom)))
    r2 = max_abs_diff(composite, f)
    if args.output:
        _write_json(
            args.output,
            {
                "quantile": quantile_to_json(qf),
                "seed": kernel_to_json(seed),
                "mechanism": kernel_to_json(mech),
            },
        )
    return [
        (r1 <= push_atol, "quantile-pushforward", r1),
        (r2 <= push_atol, "seed-mechanism-composite", r2),
    ]


def _cmd_check_cs(args) -> list[CheckLine]:
    atol = _atol()
    p = _read(args.p, kernel_from_json, atol)
    f = _read(args.f, kernel_from_json, atol)
    g = _read(args.g, kernel_from_json, atol)
    report = cs_check(p, f, g, consequent_atol=_strict_atol(1e-6))
    return [
        (report.antecedent_holds, "cs-antecedent", report.antecedent_residual),
        (report.consequent_holds, "cs-as-equal", report.consequent_residual),
    ]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="finstoch",
        description=(
            "Checks on finite stochastic kernels: model validation, "
            "conditional independence, Markov properties, factorization, "
            "latent grid constructions, derivation replay, and noise "
            "outsourcing."
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate-model", help="structural rules of a model file")
    s.add_argument("model")
    s.set_defaults(handler=_cmd_validate_model)

    s = sub.add_parser("check-ci", help="conditional independence on a state")
    s.add_argument("state")
    s.add_argument("--x", required=True, help="comma-separated wires")
    s.add_argument("--y", required=True, help="comma-separated wires")
    s.add_argument("--given", default="", help="comma-separated wires")
    s.set_defaults(handler=_cmd_check_ci)

    s = sub.add_parser(
        "check-markov",
        help="Markov properties of a state with respect to a model",
    )
    s.add_argument("state")
    s.add_argument("model")
    s.add_argument("--timing", help="JSON file of box stages")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--local", action="store_true", help="local property only")
    mode.add_argument("--ordered", action="store_true", help="ordered property only")
    s.set_defaults(handler=_cmd_check_markov)

    s = sub.add_parser("factorize", help="read box kernels off a state")
    s.add_argument("state")
    s.add_argument("model")
    s.add_argument("--timing", help="JSON file of box stages")
    s.add_argument("-o", "--output", required=True, help="assignment JSON to write")
    s.set_defaults(handler=_cmd_factorize)

    s = sub.add_parser("build-ah", help="joint state of the latent grid construction")
    s.add_argument("spec")
    s.add_argument(
        "--expose-latents",
        action="store_true",
        help="keep the shared latent and the row/column tails as wires",
    )
    s.add_argument("-o", "--output", required=True, help="state JSON to write")
    s.set_defaults(handler=_cmd_build_ah)

    s = sub.add_parser(
        "verify-ah", help="independence facts of the latent grid construction"
    )
    s.add_argument("spec")
    s.set_defaults(handler=_cmd_verify_ah)

    s = sub.add_parser(
        "check-exchangeable",
        help="permutation invariance of a state with indexed wire names",
    )
    s.add_argument("state")
    s.add_argument("--grid", help="expected shape MxN (or N for sequences)")
    s.set_defaults(handler=_cmd_check_exchangeable)

    s = sub.add_parser("replay", help="validate a derivation step by step")
    s.add_argument("derivation")
    s.set_defaults(handler=_cmd_replay)

    s = sub.add_parser(
        "noise-outsource",
        help="represent a kernel as a uniform seed plus a deterministic map",
    )
    s.add_argument("kernel")
    s.add_argument("--order", help="total order of the output values")
    s.add_argument("-o", "--output", help="JSON file for quantile, seed, mechanism")
    s.set_defaults(handler=_cmd_noise_outsource)

    s = sub.add_parser(
        "check-cs",
        help="equal pairings against a state force almost-sure equality",
    )
    s.add_argument("p")
    s.add_argument("f")
    s.add_argument("g")
    s.set_defaults(handler=_cmd_check_cs)

    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _emit(args.handler(args))
    except FinstochError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
