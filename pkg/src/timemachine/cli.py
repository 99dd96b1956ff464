"""Command-line front end: ``python3 -m timemachine <command> [flags]``.

Commands
  expand   normal-ordered H^k, worm-track table and coefficient audit
  evolve   truncated evolution matrix, unitarity defect and flux report
  entropy  first-order regularized entropy with its derivation
  bogo     Bogoliubov rows, residuals and hermiticity gap

Settings come from flags, then a JSON ``--config`` file, then defaults.
Exit codes: 0 success, 2 invalid input, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import audit, bogoliubov, diagrams, entropy, hammat, oracles
from .delta import Kronecker, parse_profile
from .opalg import Couplings, format_grouped, hamiltonian_power

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INTERNAL = 3

FORMATS = ("json", "csv", "text")


class ValidationError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


@dataclass
class RunConfig:
    alpha: float = 0.3
    beta: float = 0.3
    g: float = 1.0
    T: float = 1.0
    N: int = 3
    nmax: int = 1
    window: int = 5
    k: int = 3
    order: int = 4
    dt: float = 0.5
    delta: str = "kronecker"
    out: str = "out"
    format: list = field(default_factory=lambda: list(FORMATS))
    omega1: str = "auto"
    omega2: str = "auto"
    initial: str = ""
    mode: str = "compose"

    def model(self) -> hammat.ModelParams:
        try:
            return hammat.ModelParams(alpha=self.alpha, beta=self.beta, g=self.g, T=self.T,
                                      N=self.N, n_max=self.nmax, M=self.window,
                                      delta=parse_profile(self.delta))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    def wants(self, fmt: str) -> bool:
        return fmt in self.format


DEFAULTS = asdict(RunConfig())


def _formats(text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {bad}; choose from {FORMATS}")
    return items


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--g", type=float)
    common.add_argument("--T", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--nmax", type=int, help="per-region occupation cap")
    common.add_argument("--window", type=int, help="half-width M of the time-slot window")
    common.add_argument("--k", type=int, help="power of H to expand")
    common.add_argument("--order", type=int, help="series order K of the evolution")
    common.add_argument("--dt", type=float, help="elapsed time t - t'")
    common.add_argument("--delta", help="kronecker or gaussian:<sigma>")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", type=_formats, help="comma list of json,csv,text")

    parser = argparse.ArgumentParser(prog="timemachine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("expand", parents=[common], help="expand H^k and audit it")
    ev = sub.add_parser("evolve", parents=[common], help="truncated evolution and unitarity defect")
    ev.add_argument("--initial", help="start occupation for the flux report, e.g. 1,1,1")
    ev.add_argument("--mode", choices=("compose", "symbolic"),
                    help="kernel family: matrix powers of H or normal-ordered powers")
    sub.add_parser("entropy", parents=[common], help="first-order regularized entropy")
    bg = sub.add_parser("bogo", parents=[common], help="Bogoliubov transformation")
    bg.add_argument("--omega1", help="energy of b1 or 'auto'")
    bg.add_argument("--omega2", help="energy of b2 or 'auto'")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, then the config file, then explicit flags."""
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - set(values)
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        values.update(data)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    if isinstance(values["format"], str):
        values["format"] = _formats(values["format"])
    return RunConfig(**values)


def _provenance(cfg: RunConfig) -> dict:
    return {"config": asdict(cfg), "defaults": DEFAULTS}


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False, default=str) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_expand(cfg: RunConfig, out: Path) -> list[Path]:
    if not 1 <= cfg.k <= 4:
        raise ValidationError(f"--k must lie in 1..4, got {cfg.k}")
    if cfg.N < 3:
        raise ValidationError("N must be at least 3")
    couplings = Couplings(N=cfg.N)
    Hk = hamiltonian_power(cfg.k, couplings)
    written = []
    terms = out / f"h{cfg.k}_terms.json"
    _write_json(terms, {**_provenance(cfg), "k": cfg.k, "term_count": len(Hk),
                        "monomials": [str(m) for m in Hk.monomials()], "terms": Hk.to_json()})
    written.append(terms)
    table = diagrams.tabulate(cfg.k, couplings)
    if cfg.wants("text"):
        p = out / f"tracks_k{cfg.k}.txt"
        p.write_text(table.to_text(), encoding="utf-8")
        written.append(p)
    rep = audit.full_audit(cfg.k, cfg.N)
    rep["tracks_table"] = table.to_json()
    p = out / f"audit_k{cfg.k}.json"
    _write_json(p, {**_provenance(cfg), **rep})
    written.append(p)
    print(format_grouped(Hk.evaluate_deltas(Kronecker(), cfg.T)))
    if not rep["oracle_consistent"]:
        raise InvariantError("engine and contraction oracle disagree; see " + str(p))
    return written


def _parse_initial(text: str, N: int):
    if not text:
        return tuple([1] * N)
    try:
        n = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad --initial {text!r}") from exc
    if len(n) != N:
        raise ValidationError(f"--initial needs {N} occupations")
    return n


def cmd_evolve(cfg: RunConfig, out: Path) -> list[Path]:
    if cfg.window <= cfg.order:
        raise ValidationError(f"window M={cfg.window} must exceed series order K={cfg.order}")
    if cfg.order < 0:
        raise ValidationError("series order must be non-negative")
    params = cfg.model()
    start = _parse_initial(cfg.initial, cfg.N)
    if max(start) > cfg.nmax:
        raise ValidationError(f"initial occupation {start} exceeds nmax={cfg.nmax}")
    U = hammat.evolve(params, cfg.dt, cfg.order, cfg.mode)
    U.metadata["delta"] = params.delta.to_json()
    if U.interior_reach < 0:
        raise ValidationError("no interior time slots: increase --window")
    defect = hammat.unitarity_defect(U)
    written = []
    if cfg.wants("csv"):
        p = out / "evolution.csv"
        U.to_csv(p)
        written.append(p)
    check = {}
    if U.U.shape[0] <= 2000 and cfg.mode == "compose":
        Hd = oracles.dense_hamiltonian(cfg.alpha, cfg.beta, cfg.g, cfg.N, cfg.nmax, cfg.window,
                                       profile=params.delta, T=cfg.T)
        Ud = oracles.dense_series(Hd, cfg.dt, cfg.order)
        cols = U.slot_columns(U.interior_slots())
        diff = float(np.max(np.abs(U.U[:, cols] - Ud[:, cols]))) if len(cols) else 0.0
        check = {"dense_oracle_max_diff": diff,
                 "dense_oracle_defect": oracles.dense_defect(Ud, U.nb, U.M, U.interior_slots())}
    h1 = hammat.power_kernels(params, 1)[1]
    norm_h = float(np.linalg.norm(h1.joint_matrix(cfg.window), 2))
    p = out / "defect.json"
    _write_json(p, {**_provenance(cfg), "defect": defect, "norm": "frobenius",
                    "defect_spectral": hammat.unitarity_defect(U, norm="spectral"),
                    "interior_slots": U.interior_slots(), "state_count": U.U.shape[0],
                    "norm_H_dt": norm_h * abs(cfg.dt),
                    "series_remainder_bound": hammat.series_remainder_bound(norm_h, abs(cfg.dt), cfg.order),
                    "oracle": check, "evolution": U.to_json()})
    written.append(p)
    flux = hammat.flux_asymmetry(U, start)
    p = out / "flux.json"
    _write_json(p, {**_provenance(cfg), "initial": list(start), "slot": 0, **flux.to_json()})
    written.append(p)
    print(f"unitarity defect (interior, Frobenius): {defect:.12g}")
    print(f"occupation change per region: {[round(x, 12) for x in flux.change]}")
    if check and check["dense_oracle_max_diff"] > 1e-9:
        raise InvariantError(f"series and dense oracle differ by {check['dense_oracle_max_diff']}")
    return written


def cmd_entropy(cfg: RunConfig, out: Path) -> list[Path]:
    params = cfg.model()
    rep = entropy.entropy_first_order(cfg.alpha, cfg.beta, cfg.dt, cfg.T, params.delta)
    trace = entropy.trace_UH_first_terms(cfg.alpha, cfg.beta, cfg.g, cfg.dt, cfg.T, params.delta)
    data = {**_provenance(cfg), **rep.to_json(), "trace_terms": trace,
            "derivation": entropy.derivation_lines(rep)}
    p = out / "entropy.json"
    _write_json(p, data)
    print("\n".join(data["derivation"]))
    return [p]


def _omega(text: str, alpha: float, beta: float, g: float):
    if text == "auto":
        return bogoliubov.omega_choices(alpha, beta, g)[1]
    try:
        return complex(text.replace(" ", "")) if "j" in text else float(text)
    except ValueError as exc:
        raise ValidationError(f"bad energy {text!r}; use a number or 'auto'") from exc


def cmd_bogo(cfg: RunConfig, out: Path) -> list[Path]:
    w1 = _omega(str(cfg.omega1), cfg.alpha, cfg.beta, cfg.g)
    w2 = _omega(str(cfg.omega2), cfg.alpha, cfg.beta, cfg.g)
    system = bogoliubov.build_system(cfg.alpha, cfg.beta, cfg.g, w1, w2)
    sol = bogoliubov.solve(system)
    rep = bogoliubov.report(sol)
    rep["omega_source"] = {"omega1": cfg.omega1, "omega2": cfg.omega2,
                           "auto_rule": "g + sqrt(alpha*beta)"}
    written = []
    p = out / "bogo.json"
    _write_json(p, {**_provenance(cfg), **rep})
    written.append(p)
    if cfg.wants("csv"):
        p = out / "bogo.csv"
        sol.to_csv(p)
        written.append(p)
    print(f"omega1 = {w1}, omega2 = {w2}")
    print(f"ODE residual {rep['ode_residual']:.3e}, normal-mode residual {rep['normal_mode_residual']:.3e}")
    print(f"hermiticity gap {rep['hermiticity']['gap']:.6g}")
    if rep["ode_residual"] > 1e-8:
        raise InvariantError(f"closed form fails its ODE: residual {rep['ode_residual']}")
    return written


COMMANDS = {"expand": cmd_expand, "evolve": cmd_evolve, "entropy": cmd_entropy, "bogo": cmd_bogo}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](cfg, out)
    except (ValidationError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InvariantError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
