"""Command-line front end.

Subcommands: capacity, region, distributions, scheme, validate.  All numeric
output uses 12 significant digits, comma-separated CSV with LF endings, and
every JSON artifact embeds the fully resolved configuration, so identical
configuration and seed reproduce byte-identical files.

Exit codes: 0 ok, 1 oracle-validation z-failure, 2 configuration error,
3 numeric failure (incl. non-certified boundary points under --strict).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .channel import ChannelConfig, LN2, c1_primary_capacity, c_sum_max
from .distributions import (MassPointDistribution, UnitDisk,
                            rayleigh_quantile_distribution)
from .errors import CapacityError, ConfigError, NumericError
from .mass_optimization import SolverOptions, optimize_secondary_disk
from .monte_carlo import (CirclesFamily, AwgnFamily, MassPointFamily,
                          UnitPhaseFamily, comparison_z,
                          mc_mutual_information)
from .mutual_information import (PhaseScheme, c2_unit_modulus,
                                 mi_disk_conditional, mi_phase_uniform,
                                 rates_discrete_amplitude, scheme_rate_pair)
from .numerics import QuadratureSpec
from .region import assemble_region, boundary_ab, boundary_bc

ENV_OUT_DIR = "MMAC_CAPACITY_OUT"

_QUAD_KEYS = ("rel_tol", "abs_tol", "radial_truncation_sigmas",
              "max_subdivisions", "angular_nodes", "radial_points_per_sigma",
              "max_angular_nodes", "expectation_panel_nodes")
_SOLVER_KEYS = ("n_starts", "max_points", "max_circles", "gain_tol",
                "kkt_tol", "futility_rounds", "maxiter", "merge_tol",
                "prune_tol", "amplitude_cap_factor")


@dataclass
class ScenarioConfig:
    """Flat, file-loadable run configuration; defaults reproduce the standard
    64-element scenario."""

    element_count: int = 64
    element_gain_sq: float = 0.003
    snr_db: tuple = (-5.0, 0.0, 5.0)
    constraint: str = "unit"
    alpha_n_max: int = 8
    mu1_grid: tuple = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.49)
    seed: int = 0
    jobs: int = 1
    strict: bool = False
    samples: int = 10_000_000
    out_dir: str = ""
    quadrature: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.constraint not in ("unit", "disk"):
            raise ConfigError("constraint must be 'unit' or 'disk'")
        if self.element_count < 1:
            raise ConfigError("element_count must be >= 1")
        if self.element_gain_sq < 0:
            raise ConfigError("element_gain_sq must be nonnegative")
        if self.alpha_n_max < 1:
            raise ConfigError("alpha_n_max must be >= 1")
        if any(not (0.0 < m < 0.5) for m in self.mu1_grid):
            raise ConfigError("mu1 grid values must lie inside (0, 0.5)")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.samples < 10_000:
            raise ConfigError("samples must be >= 10000")
        bad_q = set(self.quadrature) - set(_QUAD_KEYS)
        bad_s = set(self.solver) - set(_SOLVER_KEYS)
        if bad_q or bad_s:
            raise ConfigError(f"unknown config keys: {sorted(bad_q | bad_s)}")
        if not self.out_dir:
            self.out_dir = os.environ.get(ENV_OUT_DIR, ".")

    def channel(self, snr_db: float) -> ChannelConfig:
        return ChannelConfig.uniform(self.element_count, self.element_gain_sq,
                                     noise_power=1.0,
                                     power_budget=10.0 ** (snr_db / 10.0))

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(**self.quadrature)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(seed=self.seed, **self.solver)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path: Optional[str] = None, **overrides) -> ScenarioConfig:
    """Defaults, then JSON file keys, then explicit overrides."""
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("snr_db", "mu1_grid"):
        if key in data:
            data[key] = tuple(float(v) for v in data[key])
    try:
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tag(snr_db: float, constraint: str) -> str:
    text = f"{snr_db:g}dB_{constraint}"
    return text.replace("-", "m").replace(".", "p")


def _dist_payload(dist: Optional[MassPointDistribution]):
    if dist is None:
        return None
    return [[loc, prob] for loc, prob in dist.points]


# ---------------------------------------------------------------------------
# subcommands

def cmd_capacity(config: ScenarioConfig) -> list:
    """Single-user capacities, the sum rate and the secondary-rate bounds per
    SNR point; returns the CSV rows."""
    spec = config.quadrature_spec()
    rows = []
    for snr_db in config.snr_db:
        cfg = config.channel(snr_db)
        snr_rx = cfg.receive_snr
        c1 = c1_primary_capacity(cfg)
        c2u = c2_unit_modulus(cfg, spec)
        _, c2d = optimize_secondary_disk(cfg, spec)
        mck = math.log1p(math.sqrt(math.pi * snr_rx) + snr_rx / math.e) / LN2
        avg = math.log1p(snr_rx) / LN2
        rows.append((snr_db, c1, c2u, c2d, mck, avg, c_sum_max(cfg)))
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "capacity.csv",
               ("snr_db", "c1_bits", "c2_unit_bits", "c2_disk_bits",
                "c2_ub_mckellips_bits", "c2_ub_avgpower_bits", "csum_bits"),
               rows)
    return rows


def cmd_region(config: ScenarioConfig) -> dict:
    """Region frontier per SNR point for the configured constraint; writes
    region_<tag>.csv/.json and returns {tag: (boundary, bc_results)}."""
    spec = config.quadrature_spec()
    solver = config.solver_options()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    any_uncertified = False
    for snr_db in config.snr_db:
        cfg = config.channel(snr_db)
        alphas = [math.pi / n for n in range(1, config.alpha_n_max + 1)]
        ab = boundary_ab(cfg, config.constraint, alphas, spec)
        bc = boundary_bc(cfg, config.constraint, config.mu1_grid, solver, spec,
                         jobs=config.jobs)
        c2_bits = None
        if config.constraint == "disk":
            _, c2_bits = optimize_secondary_disk(cfg, spec)
        boundary = assemble_region(
            ab, bc, cfg, config.constraint, spec, c2_bits=c2_bits,
            metadata={"mu1_grid": list(config.mu1_grid),
                      "alpha_n_max": config.alpha_n_max,
                      "seed": config.seed})
        tag = _tag(snr_db, config.constraint)
        _write_csv(out / f"region_{tag}.csv", ("r1_bits", "r2_bits", "provenance"),
                   [(p.r1, p.r2, p.provenance) for p in boundary.points])
        bc_payload = []
        for res in bc:
            any_uncertified |= not res.converged
            bc_payload.append({
                "mu1": res.weights.mu1,
                "constraint": res.constraint,
                "converged": res.converged,
                "status": res.status,
                "objective_nats": res.objective_nats,
                "rate_pair": [res.rate_pair.r1, res.rate_pair.r2],
                "kkt": res.kkt.as_dict(),
                "dist_a": _dist_payload(res.dist_a),
                "dist_x2": _dist_payload(res.dist_x2),
                "escalation": [list(e) for e in res.escalation],
            })
        _write_json(out / f"region_{tag}.json", {
            "version": __version__,
            "config": config.as_dict(),
            "snr_db": snr_db,
            "constraint": config.constraint,
            "tolerances": boundary.tolerances,
            "metadata": boundary.metadata,
            "points": [[p.r1, p.r2, p.provenance] for p in boundary.points],
            "dropped": [[p.r1, p.r2, p.provenance] for p in boundary.dropped],
            "boundary_bc": bc_payload,
        })
        results[tag] = (boundary, bc)
    if any_uncertified:
        print("warning: some boundary points lack optimality certification "
              "(see status fields)", file=sys.stderr)
        if config.strict:
            raise NumericError("uncertified boundary points under --strict")
    return results


def cmd_distributions(config: ScenarioConfig) -> dict:
    """Optimized mass-point laws per mu1 at each SNR point; writes
    distributions_<tag>_mu*.csv/.json and returns the solver results."""
    spec = config.quadrature_spec()
    solver = config.solver_options()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    any_uncertified = False
    for snr_db in config.snr_db:
        cfg = config.channel(snr_db)
        bc = boundary_bc(cfg, config.constraint, config.mu1_grid, solver, spec,
                         jobs=config.jobs)
        for res in bc:
            any_uncertified |= not res.converged
            mu_tag = f"{res.weights.mu1:g}".replace(".", "p")
            tag = f"{_tag(snr_db, config.constraint)}_mu{mu_tag}"
            rows = [("amplitude", loc, prob) for loc, prob in res.dist_a.points]
            if res.dist_x2 is not None:
                rows += [("radius", loc, prob) for loc, prob in res.dist_x2.points]
            _write_csv(out / f"distributions_{tag}.csv",
                       ("kind", "location", "probability"), rows)
            _write_json(out / f"distributions_{tag}.json", {
                "version": __version__,
                "config": config.as_dict(),
                "snr_db": snr_db,
                "mu1": res.weights.mu1,
                "constraint": res.constraint,
                "converged": res.converged,
                "status": res.status,
                "rate_pair": [res.rate_pair.r1, res.rate_pair.r2],
                "kkt": res.kkt.as_dict(),
                "dist_a": _dist_payload(res.dist_a),
                "dist_x2": _dist_payload(res.dist_x2),
            })
            results[tag] = res
    if any_uncertified and config.strict:
        raise NumericError("uncertified boundary points under --strict")
    return results


def cmd_scheme(config: ScenarioConfig) -> list:
    """Rate pairs of both phase schemes and decoding orders over the
    admissible angles; writes scheme_rates_<tag>.csv per SNR point."""
    spec = config.quadrature_spec()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_all = []
    for snr_db in config.snr_db:
        cfg = config.channel(snr_db)
        rows = []
        for n in range(1, config.alpha_n_max + 1):
            for kind in ("I", "II"):
                for order in ("x1", "x2"):
                    pair = scheme_rate_pair(PhaseScheme(kind, n), order, cfg, spec)
                    rows.append((math.pi / n, n, kind, order,
                                 pair.r1, pair.r2, pair.r1 + pair.r2))
        _write_csv(out / f"scheme_rates_{_tag(snr_db, config.constraint)}.csv",
                   ("alpha", "n", "scheme", "decode_first",
                    "r1_bits", "r2_bits", "sum_bits"), rows)
        rows_all.append((snr_db, rows))
    return rows_all


def _validate_case(args):
    idx, label, family, cfg, quad_nats, samples, seed = args
    est = mc_mutual_information(family, cfg, samples, seed)
    z = comparison_z(quad_nats, est)
    return idx, label, quad_nats, est.mean, est.stderr, z


def validation_cases(config: ScenarioConfig):
    """The standard quadrature-vs-oracle grid: four SNR points crossed with
    the three input families, plus the closed-form Gaussian anchor cases."""
    spec = config.quadrature_spec()
    cases = []
    idx = 0
    for snr_db in (-10.0, 0.0, 5.0, 15.0):
        cfg = config.channel(snr_db)
        power = cfg.power_budget
        full = math.sqrt(power)
        s_full = full * cfg.composite_gain

        fam = UnitPhaseFamily(amplitude=full)
        quad = mi_phase_uniform(s_full, cfg.noise_power, spec)
        cases.append((idx, f"unit-phase@{snr_db:g}dB", fam, cfg, quad)); idx += 1

        dist3 = rayleigh_quantile_distribution(power, 3)
        fam = MassPointFamily(dist_a=dist3, target="primary")
        quad = rates_discrete_amplitude(dist3, cfg, spec).r1 * LN2
        cases.append((idx, f"mass-point-3@{snr_db:g}dB", fam, cfg, quad)); idx += 1

        circles = MassPointDistribution.from_arrays([0.0, 1.0], [0.5, 0.5], UnitDisk())
        fam = CirclesFamily(dist_x2=circles, amplitude=full)
        quad = mi_disk_conditional(circles, full, cfg, spec)
        cases.append((idx, f"circles-2@{snr_db:g}dB", fam, cfg, quad)); idx += 1

        fam = AwgnFamily()
        quad = math.log1p(cfg.receive_snr)
        cases.append((idx, f"awgn@{snr_db:g}dB", fam, cfg, quad)); idx += 1
    return cases


def cmd_validate(config: ScenarioConfig) -> list:
    """Quadrature against the Monte-Carlo oracle; prints the z-score table,
    writes validation.csv, and returns the rows."""
    cases = validation_cases(config)
    tasks = [(i, label, fam, cfg, quad, config.samples, config.seed)
             for i, label, fam, cfg, quad in cases]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = sorted(pool.map(_validate_case, tasks))
    else:
        rows = [_validate_case(t) for t in tasks]
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "validation.csv",
               ("case", "quad_nats", "mc_nats", "mc_stderr", "z"),
               [r[1:] for r in rows])
    print(f"{'case':24s} {'quad':>12s} {'mc':>12s} {'stderr':>10s} {'z':>7s}")
    for _, label, quad, mc, se, z in rows:
        print(f"{label:24s} {quad:12.6f} {mc:12.6f} {se:10.2e} {z:+7.2f}")
    return rows


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmac-capacity",
        description="Rate region of the multiplicative multiple-access channel "
                    "formed by a passive reflecting secondary transmitter.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("capacity", "single-user capacities, sum rate and bounds per SNR"),
            ("region", "assemble the rate-region frontier"),
            ("distributions", "optimized amplitude/radius mass points per mu1"),
            ("scheme", "phase-scheme rate pairs on the max-sum-rate segment"),
            ("validate", "quadrature vs Monte-Carlo oracle z-test")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (flat keys)")
        p.add_argument("--snr-db", nargs="+", type=float, dest="snr_db")
        p.add_argument("--constraint", choices=("unit", "disk"))
        p.add_argument("--mu1-grid", nargs="+", type=float, dest="mu1_grid")
        p.add_argument("--alpha-n-max", type=int, dest="alpha_n_max")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--strict", action="store_true", default=None)
        p.add_argument("--out", dest="out_dir")
    return parser


_COMMANDS = {
    "capacity": cmd_capacity,
    "region": cmd_region,
    "distributions": cmd_distributions,
    "scheme": cmd_scheme,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(
            args.config,
            snr_db=args.snr_db, constraint=args.constraint,
            mu1_grid=args.mu1_grid, alpha_n_max=args.alpha_n_max,
            seed=args.seed, jobs=args.jobs, samples=args.samples,
            strict=args.strict, out_dir=args.out_dir)
        result = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        worst = max(abs(row[5]) for row in result)
        if worst > 3.0:
            print(f"validation FAILED: worst |z| = {worst:.2f}", file=sys.stderr)
            return 1
        print(f"validation ok: worst |z| = {worst:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
