"""Command-line entry point.

    mpoforge <ground-state|expfit|longrange|verify> [--config FILE] [--output-dir DIR] [key=value ...]

Settings come from a flat ``key=value`` file (``#`` starts a comment) and are
overridden by ``key=value`` arguments. Every command writes ``result.json``
into the output directory; ground-state runs also write ``trace.csv`` and
``state.bin``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .expfit import fit as fit_samples
from .expfit import fit_power_law, read_samples_csv
from .hamiltonians import build_expdecay_mpo, build_ising_mpo, build_nn_mpo, build_powerlaw_mpo
from .imps import (
    UniformMPS,
    default_schedule,
    ground_state_search,
    load_state,
    measure_bond_energy,
    normalize,
    product_state,
    save_state,
    write_trace_csv,
)
from .pauli import X, Y, Z
from .reference import reference_energy
from .thermo import energy_density, gradient_optimize, variance_density
from .verify import parse_schedule, run_suites

log = logging.getLogger("mpoforge")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

COMMANDS = ("ground-state", "expfit", "longrange", "verify")


def _opt(default, doc):
    return field(default=default, metadata={"doc": doc})


@dataclass
class RunConfig:
    # ground-state
    model: str = _opt("tfi", "tfi (H = -sum ZZ - B sum X) or heisenberg (H = sum XX+YY+ZZ)")
    B: float = _opt(1.0, "transverse field of the tfi model")
    D: int = _opt(16, "maximal bond dimension")
    schedule: str = _opt("", "eps:max_sweeps[:tol],...; empty uses eps = 0.1, 0.05, 0.02, ... down to eps_min")
    eps_min: float = _opt(1e-5, "smallest step of the default schedule")
    max_sweeps: int = _opt(2000, "sweep limit per stage of the default schedule")
    measure_every: int = _opt(2, "sweeps between energy measurements (even)")
    eig_tol: float = _opt(1e-10, "tolerance of the iterative transfer eigensolver")
    # expfit
    p: float = _opt(3.0, "power of r^-p to fit")
    n: int = _opt(10, "number of exponentials")
    n_samples: int = _opt(1000, "number of samples r = 1..N")
    method: str = _opt("qr", "qr or direct")
    input: str = _opt("", "CSV file of (k, f(k)) samples instead of a power law")
    # longrange
    mpo: str = _opt("powerlaw", "nn, ising, expdecay or powerlaw")
    mu: float = _opt(1.0, "coupling of ising / prefactor of powerlaw")
    mu1: float = _opt(1.0, "XX coupling (nn, expdecay)")
    mu2: float = _opt(1.0, "YY coupling (nn, expdecay)")
    mu3: float = _opt(1.0, "ZZ coupling (nn, expdecay)")
    lam: float = _opt(0.6, "decay rate of every expdecay channel")
    field_x: float = _opt(0.0, "coefficient of the one-site X term (nn, expdecay)")
    state: str = _opt("", "state file, 'zero', 'plus' or 'random' (empty: random)")
    state_D: int = _opt(4, "bond dimension of a random state")
    lam_shift: float = _opt(math.nan, "shift of the variance; nan uses the energy density")
    optimize_iters: int = _opt(0, "gradient steps on the state before evaluation")
    beta: float = _opt(0.4407, "inverse temperature for the classical Ising check in verify")
    # verify
    level: str = _opt("fast", "fast or full (full adds the D = 64 benchmarks)")
    seed: int = _opt(0, "seed of randomized states")

    @classmethod
    def help_text(cls) -> str:
        rows = [f"  {f.name} = {f.default!r:<10} {f.metadata['doc']}" for f in fields(cls)]
        return "settings (key=value):\n" + "\n".join(rows)

    def update(self, items: dict[str, str]) -> None:
        types = {f.name: f.type for f in fields(self)}
        for key, raw in items.items():
            if key not in types:
                raise ValueError(f"unknown setting {key!r}")
            kind = {"int": int, "float": float, "str": str}[types[key]]
            setattr(self, key, kind(raw))


def parse_pairs(lines) -> dict[str, str]:
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    return obj


def write_result(out_dir: Path, record: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "result.json"
    path.write_text(json.dumps(_json_ready(record), indent=2, sort_keys=True) + "\n")
    return path


def _record(cfg: RunConfig, command: str, **kw) -> dict:
    rec = {"command": command, "version": __version__, "inputs": dataclasses.asdict(cfg)}
    rec.update(kw)
    return rec


def cmd_ground_state(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    if cfg.schedule:
        stages = parse_schedule(cfg.schedule)
    else:
        stages = default_schedule(cfg.eps_min, 0.1, cfg.max_sweeps)
    res = ground_state_search(
        cfg.model, cfg.D, stages, B=cfg.B, measure_every=cfg.measure_every, eig_tol=cfg.eig_tol
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(res.trace, out_dir / "trace.csv")
    save_state(res.mps, out_dir / "state.bin")
    ref = reference_energy(cfg.model, cfg.B)
    rec = _record(
        cfg,
        "ground-state",
        energy=res.energy,
        sweeps=res.sweeps,
        converged=res.converged,
        message=res.message,
        final_D=res.mps.D,
        stage_energies=[list(x) for x in res.stage_energies],
        trace="trace.csv",
        state="state.bin",
        wall_time=res.wall_time,
    )
    if ref is not None:
        rec["reference"] = ref
        rec["relative_error"] = abs(res.energy - ref) / abs(ref)
    return rec, EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_expfit(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    t0 = time.perf_counter()
    if cfg.input:
        samples = read_samples_csv(cfg.input)
        f = fit_samples(samples, cfg.n, cfg.method)
    else:
        f = fit_power_law(cfg.p, cfg.n, cfg.n_samples, cfg.method)
    rec = _record(
        cfg,
        "expfit",
        exponents=f.exponents,
        weights=f.weights,
        n_terms=f.n_terms,
        cost=f.cost,
        max_dev=f.max_dev,
        unstable=f.unstable,
        diagnostics=list(f.diagnostics),
        wall_time=time.perf_counter() - t0,
    )
    return rec, EXIT_OK


def _build_mpo(cfg: RunConfig):
    fld = cfg.field_x * X
    if cfg.mpo == "nn":
        return build_nn_mpo(cfg.mu1, cfg.mu2, cfg.mu3, fld)
    if cfg.mpo == "ising":
        return build_ising_mpo(cfg.mu)
    if cfg.mpo == "expdecay":
        return build_expdecay_mpo([cfg.mu1, cfg.mu2, cfg.mu3], [cfg.lam] * 3, fld)
    if cfg.mpo == "powerlaw":
        return build_powerlaw_mpo(cfg.p, cfg.n, cfg.n_samples, (Z, Z), prefactor=cfg.mu)
    raise ValueError(f"unknown mpo {cfg.mpo!r}")


def _load_state(cfg: RunConfig) -> UniformMPS:
    if cfg.state == "zero":
        return product_state([1.0, 0.0])
    if cfg.state == "plus":
        return product_state([1.0, 1.0])
    if cfg.state in ("", "random"):
        rng = np.random.default_rng(cfg.seed)
        a = rng.normal(size=(2, cfg.state_D, cfg.state_D))
        return normalize(UniformMPS(a + a.transpose(0, 2, 1)))
    return normalize(load_state(cfg.state))


def cmd_longrange(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    t0 = time.perf_counter()
    h = _build_mpo(cfg)
    st = _load_state(cfg)
    opt_trace: list[float] = []
    if cfg.optimize_iters > 0:
        res = gradient_optimize(st, h, cfg.optimize_iters)
        st = res.mps
        opt_trace = list(res.energies)
    e, ev = energy_density(st, h)
    shift = e if math.isnan(cfg.lam_shift) else cfg.lam_shift
    c1, c2, vev = variance_density(st, h, shift)
    jordan = {"block_size": ev.block_size, "residual": ev.residual}
    if ev.Q is not None:
        jordan["Q12"] = ev.Q[0, 1]
        jordan["minus_inverse_overlap"] = -1.0 / (ev.qt_l[0] @ ev.q_r)
    rec = _record(
        cfg,
        "longrange",
        energy=e,
        lam_shift=shift,
        variance_linear=c1,
        variance_quadratic=c2,
        variance_block_size=vev.block_size,
        jordan=jordan,
        optimization_trace=opt_trace,
        wall_time=time.perf_counter() - t0,
    )
    if cfg.mpo == "nn" and st.d == 2:
        # cross-check with the two-site measurement
        two = cfg.mu1 * np.kron(X, X) + cfg.mu2 * np.real(np.kron(Y, Y)) + cfg.mu3 * np.kron(Z, Z)
        rec["bond_energy"] = measure_bond_energy(st, two, cfg.field_x * X)
    return rec, EXIT_OK


def cmd_verify(cfg: RunConfig, out_dir: Path) -> tuple[dict, int]:
    t0 = time.perf_counter()
    checks = run_suites(cfg.level)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    rec = _record(
        cfg,
        "verify",
        checks=[dataclasses.asdict(c) for c in checks],
        passed=not failed,
        wall_time=time.perf_counter() - t0,
    )
    return rec, EXIT_OK if not failed else EXIT_ERROR


HANDLERS = {
    "ground-state": cmd_ground_state,
    "expfit": cmd_expfit,
    "longrange": cmd_longrange,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mpoforge",
        description="MPO constructions, uniform-MPS ground states and thermodynamic-limit evaluators.",
        epilog=RunConfig.help_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("overrides", nargs="*", metavar="key=value")
    p.add_argument("--config", type=Path, help="flat key=value settings file")
    p.add_argument("--output-dir", type=Path, default=Path("."), help="where result files go")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = RunConfig()
    try:
        if args.config is not None:
            cfg.update(parse_pairs(args.config.read_text().splitlines()))
        cfg.update(parse_pairs(args.overrides))
        record, code = HANDLERS[args.command](cfg, args.output_dir)
    except Exception as exc:  # every failure becomes a record and a nonzero exit
        log.error("%s failed: %s", args.command, exc)
        record, code = _record(cfg, args.command, error=f"{type(exc).__name__}: {exc}"), EXIT_ERROR
    path = write_result(args.output_dir, record)
    summary = {k: record[k] for k in ("energy", "relative_error", "cost", "max_dev", "passed") if k in record}
    print(json.dumps(_json_ready({"result": str(path), **summary})))
    return code


if __name__ == "__main__":
    sys.exit(main())
