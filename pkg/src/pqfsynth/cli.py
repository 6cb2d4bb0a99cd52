"""Command-line front end: synth, bench, simulate, selftest."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
import time
from fractions import Fraction

import mpmath
import numpy as np

from . import __version__
from .config import SynthConfig
from .errors import (AssumptionFailure, InvalidInput, IterationCap, PqfError,
                     PrecisionExhausted, VerificationFailure)
from .exactsynth import _BASIS_M, Circuit, ExactUnitary, eval_circuit, synth
from .fallback import fallback_approx
from .modifier import find_modifier
from .protocol import (PhaseTarget, PqfProtocol, build_pqf, cost_moments,
                       protocol_from_dict, protocol_to_dict, reduce_angle,
                       simulate)
from .relation import approx_phase, cf_phase, rescale_floor

log = logging.getLogger("pqf")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ASSUMPTION = 3
EXIT_PRECISION = 4
EXIT_VERIFICATION = 5

_PI_RE = re.compile(
    r"^\s*(?P<sign>-?)\s*(?:(?P<num>\d+)\s*\*\s*)?pi\s*(?:/\s*(?P<den>\d+))?\s*$",
    re.IGNORECASE)


def parse_theta(text: str):
    """Angle as 'pi/N', 'a*pi/b', or decimal radians.

    Returns (pi_multiple: Fraction | None, value: float).  Rational
    multiples of pi stay exact so that representable angles short-circuit
    to a bare diagonal gate.
    """
    m = _PI_RE.match(text)
    if m:
        num = int(m.group("num") or 1)
        den = int(m.group("den") or 1)
        if den == 0:
            raise InvalidInput("zero denominator in angle")
        frac = Fraction(num, den)
        if m.group("sign"):
            frac = -frac
        return frac, float(frac) * math.pi
    try:
        return None, float(text)
    except ValueError:
        raise InvalidInput(
            f"cannot parse angle {text!r}: use 'pi/N', 'a*pi/b', or radians")


def _config_from_args(args) -> SynthConfig:
    kw = {"seed": args.seed}
    if args.precision_bits:
        kw["precision_bits"] = args.precision_bits
    if args.candidate_budget:
        kw["candidate_budget_factor"] = args.candidate_budget
    if args.factor_budget:
        kw["rho_iter_budget"] = args.factor_budget
    return SynthConfig(**kw)


def _exact_protocol(frac: Fraction, basis: str, eps: float) -> PqfProtocol:
    """Protocol for theta = frac*pi when the residual is exactly zero."""
    m = _BASIS_M[basis]
    j = int(frac * m / 2)  # frac*m/2 is an integer here
    _, prefix = reduce_angle(float(frac) * math.pi, basis)
    empty = Circuit(basis, ())
    return PqfProtocol(PhaseTarget(float(frac) * math.pi, eps), basis, (),
                       empty, float(prefix.cost), 0.0, prefix)


def cmd_synth(args) -> int:
    config = _config_from_args(args)
    frac, theta = parse_theta(args.theta)
    basis = args.basis
    m = _BASIS_M[basis]
    if frac is not None and (frac * m / 2).denominator == 1:
        proto = _exact_protocol(frac, basis, args.eps)
    else:
        prec = config.working_precision(args.eps) + 64
        with mpmath.workprec(prec):
            th = (mpmath.pi * frac.numerator / frac.denominator
                  if frac is not None else mpmath.mpf(theta))
            proto = build_pqf(th, args.eps, args.rounds, basis, config)
    out = json.dumps(protocol_to_dict(proto), indent=2)
    _emit(out, args.out)
    return EXIT_OK


def bench_target(theta, eps, basis: str,
                 config: SynthConfig = SynthConfig()) -> dict:
    """One benchmark row: a single-round protocol plus pipeline statistics."""
    m = _BASIS_M[basis]
    t0 = time.perf_counter()
    prec = config.working_precision(eps) + 64
    with mpmath.workprec(prec):
        resid, prefix = reduce_angle(theta, basis, prec)
        target = PhaseTarget(resid, float(eps))
        apx = cf_phase(target, config) if m == 4 else \
            approx_phase(target, m, config)
        z = rescale_floor(apx.z, eps, m)
        mod = find_modifier(z, m, config)
        unit = ExactUnitary(m, z * mod.r.to_cyc(), mod.y, mod.L_r, 0)
        circ = synth(unit)
        fb_resid, fb_prefix = reduce_angle(mod_failure_phase(resid, mod), basis,
                                           prec)
        fb = fallback_approx(fb_resid, eps, m, config) + fb_prefix
    m1, _ = cost_moments([circ.cost], [1 - mod.p_r], fb.cost)
    return {
        "theta": float(theta),
        "eps": float(eps),
        "expected_cost": float(m1) + prefix.cost,
        "p_success": mod.p_r,
        "L_r": mod.L_r,
        "candidates_tried": mod.candidates_tried,
        "pslq_iterations": apx.iterations,
        "abs_z": math.sqrt(z.norm_sq().eval_real(96)[0]),
        "wall_time": time.perf_counter() - t0,
        "round_cost": circ.cost,
        "fallback_cost": fb.cost,
    }


def mod_failure_phase(theta, mod) -> float:
    with mpmath.workprec(mpmath.mp.prec):
        yv, _ = mod.y.eval_complex(mpmath.mp.prec)
        two_pi = 2 * mpmath.pi
        x = mpmath.mpf(theta) - mpmath.pi - 2 * mpmath.arg(yv)
        x -= two_pi * mpmath.nint(x / two_pi)
        return x


def fit_cost_model(eps_values, mean_costs, base: float):
    """Least squares for a*log_b(1/eps) + c*log_b(log_b(1/eps)) + d."""
    xs = np.array([math.log(1 / e, base) for e in eps_values])
    rows = np.column_stack([xs, np.log(xs) / math.log(base),
                            np.ones_like(xs)])
    sol, *_ = np.linalg.lstsq(rows, np.array(mean_costs), rcond=None)
    return tuple(float(v) for v in sol)


def _bench_one(job):
    theta, eps, basis, config = job
    try:
        return bench_target(theta, eps, basis, config)
    except PqfError as exc:
        return {"theta": float(theta), "eps": float(eps),
                "error": f"{type(exc).__name__}: {exc}"}


def cmd_bench(args) -> int:
    config = _config_from_args(args)
    basis = args.basis
    eps_list = ([float(e) for e in args.eps_list.split(",")]
                if args.eps_list else
                [10.0 ** -p for p in (10, 13, 16, 19, 22, 25)])
    rng = np.random.Generator(np.random.Philox(args.seed))
    angles = rng.uniform(0, math.pi / 2, args.angles)
    jobs = [(float(t), e, basis, config) for e in eps_list for t in angles]
    workers = os.cpu_count() or 1
    if workers > 1 and len(jobs) > 4:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    fields = ["theta", "eps", "expected_cost", "p_success", "L_r",
              "candidates_tried", "pslq_iterations", "abs_z", "wall_time",
              "round_cost", "fallback_cost", "error"]
    buf = io.StringIO()
    buf.write(f"# pqf {__version__} bench basis={basis} angles={args.angles} "
              f"seed={args.seed} eps={','.join('%g' % e for e in eps_list)}\n")
    writer = csv.DictWriter(buf, fieldnames=fields, restval="")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    base = 5.0 if basis == "v" else 2.0
    means, used = [], []
    for e in eps_list:
        vals = [r["expected_cost"] for r in rows
                if r["eps"] == e and "error" not in r]
        if vals:
            used.append(e)
            means.append(sum(vals) / len(vals))
    if len(used) >= 3:
        a, c, d = fit_cost_model(used, means, base)
        buf.write(f"# fit mean_expected_cost ~ {a:.4f}*log{base:g}(1/eps) + "
                  f"{c:.4f}*log{base:g}(log{base:g}(1/eps)) + {d:.4f}\n")
    _emit(buf.getvalue(), args.out, newline=False)
    return EXIT_OK


def cmd_simulate(args) -> int:
    with open(args.protocol) as fh:
        data = json.load(fh)
    proto = protocol_from_dict(data)
    rep = simulate(proto, args.trials, args.seed)
    out = json.dumps({
        "trials": rep.trials,
        "seed": rep.seed,
        "success_freq": list(rep.success_freq),
        "mean_cost": rep.mean_cost,
        "var_cost": rep.var_cost,
        "max_distance": rep.max_distance,
        "expected_cost": proto.expected_cost,
    }, indent=2)
    _emit(out, args.out)
    return EXIT_OK


def _selftest_orbits():
    from .rings import CycInt, parity_mu, _parity_tables
    orbit_of, _ = _parity_tables()
    sizes = {}
    for name in ("O0", "O1", "O2", "O3"):
        sizes[name] = sum(1 for v in orbit_of.values() if v == name)
    assert sizes == {"O0": 1, "O1": 6, "O2": 6, "O3": 3}, sizes
    assert parity_mu(CycInt(12, (1, 1, 0, 0))).orbit == "O2"


def _selftest_norm_equations():
    from .normeq import solve_norm_eq
    from .rings import RealCycInt
    # achievable |y|^2 for small y, per ring, as a brute-force oracle
    for m, rad in ((8, 4), (12, 3)):
        achievable = set()
        from .rings import CycInt
        rng = range(-rad, rad + 1)
        for c0 in rng:
            for c1 in rng:
                for c2 in rng:
                    for c3 in rng:
                        n = CycInt(m, (c0, c1, c2, c3)).norm_sq()
                        achievable.add((n.a, n.b))
        for a in range(0, 30):
            for b in range(-10, 11):
                xi = RealCycInt(m, a, b)
                if xi.sign() < 0 or xi.bullet().sign() < 0:
                    continue
                out = solve_norm_eq(xi, m)
                if (a, b) in achievable:
                    assert out.solved, (m, a, b, out.status)
                elif out.status == "unsolvable":
                    assert (a, b) not in achievable
    # corrected large ramified-power fixture
    xi = RealCycInt(8, 1270080, 211680)
    out = solve_norm_eq(xi, 8)
    assert out.solved and out.y.norm_sq() == xi


def _selftest_roundtrip():
    import random
    from .exactsynth import circuit_matrix, gate_matrix, _mat_equal
    rng = random.Random(11)
    toks = {"t": ["H", "T", "Tdg", "S", "X"],
            "pi12": ["H", "K(1)", "K(-1)", "K(3)", "X"],
            "v": ["VX", "VY", "VZ", "VXdg", "X", "S"]}
    for basis, pool in toks.items():
        for _ in range(12):
            c = Circuit(basis, tuple(rng.choice(pool) for _ in range(16)))
            u = eval_circuit(c)
            c2 = synth(u)
            assert _mat_equal(circuit_matrix(c2), u.to_matrix())


def _selftest_grid():
    import random
    from .modifier import grid_point
    rng = random.Random(3)
    for d in (2, 3):
        unit_sq = (1 + math.sqrt(2)) ** 2 if d == 2 else (2 + math.sqrt(3)) ** 2
        for _ in range(40):
            x0 = rng.uniform(-50, 50)
            y0 = rng.uniform(-50, 50)
            w = rng.uniform(1.1 * unit_sq, 4 * unit_sq)
            wx = math.exp(rng.uniform(-2, 2))
            g = grid_point(x0, x0 + w * wx, y0, y0 + w / wx, d)
            gv, _ = g.eval_real(128)
            bv, _ = g.bullet().eval_real(128)
            assert x0 <= gv <= x0 + w * wx and y0 <= bv <= y0 + w / wx


def cmd_selftest(args) -> int:
    checks = [("parity orbit table", _selftest_orbits),
              ("norm-equation sweep vs brute force", _selftest_norm_equations),
              ("exact synthesis round trips", _selftest_roundtrip),
              ("grid point enumeration", _selftest_grid)]
    failed = 0
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            fn()
            print(f"PASS {name} ({time.perf_counter() - t0:.1f}s)")
        except Exception as exc:
            failed += 1
            print(f"FAIL {name}: {exc}")
    print(f"{len(checks) - failed}/{len(checks)} passed")
    return EXIT_OK if failed == 0 else 1


def _emit(text: str, path, newline=True):
    if path:
        with open(path, "w") as fh:
            fh.write(text if not newline else text + "\n")
    else:
        sys.stdout.write(text if not newline else text + "\n")


def _add_common(p):
    p.add_argument("--basis", choices=["t", "v", "pi12"], default="t")
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--candidate-budget", type=int, default=None)
    p.add_argument("--factor-budget", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--out", default=None)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pqf",
        description="Compile Z-rotations into probabilistic circuits with "
                    "fallback over Clifford+T, Clifford+V, or Clifford+pi/12.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="compile one rotation angle")
    _add_common(p)
    p.add_argument("--theta", required=True,
                   help="angle: 'pi/N', 'a*pi/b', or decimal radians")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("bench", help="batch statistics over random angles")
    _add_common(p)
    p.add_argument("--angles", type=int, default=100)
    p.add_argument("--eps-list", default=None,
                   help="comma-separated eps values")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("simulate", help="Monte-Carlo run of a protocol file")
    _add_common(p)
    p.add_argument("--protocol", required=True, help="protocol JSON file")
    p.add_argument("--trials", type=int, default=100000)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("selftest", help="run desk-scale oracle checks")
    _add_common(p)
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("PQF_LOG", "WARNING"))
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else 0
    try:
        if args.eps is not None and not (0 < args.eps < 0.5):
            raise InvalidInput("--eps must lie in (0, 0.5)")
        if args.rounds is not None and args.rounds < 0:
            raise InvalidInput("--rounds must be nonnegative")
        return args.fn(args)
    except (InvalidInput, ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("invalid input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (AssumptionFailure, IterationCap) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except VerificationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
