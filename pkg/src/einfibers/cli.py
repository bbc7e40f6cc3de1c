"""Command-line driver: ``verify``, ``sweep``, ``base``, ``chern`` and ``domain``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from .report import CheckReport

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
P2_MESSAGE = "p ≥ 3 required; p = 2 treated in prior work"

log = logging.getLogger("einfibers")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    p_list: list = field(default_factory=lambda: [3, 4, 5, 6])
    seed: int = 42
    rank_rel: float = 1e-6
    identity: float = 1e-10
    containment: float = 1e-8
    t_steps: int = 33
    dir_steps: int = 64
    n_samples: int = 1000
    n_u: int = 500
    n_fiber: int = 4
    word_length: int = 8
    gap_threshold: float = 0.5
    equator_steps: int = 4096
    n_base: int = 200

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not isinstance(self.p_list, list) or not self.p_list:
            raise ConfigError("p_list must be a non-empty list of integers")
        for p in self.p_list:
            if isinstance(p, bool) or not isinstance(p, int):
                raise ConfigError(f"p_list entries must be integers, got {p!r}")
            if p < 3:
                raise ConfigError(P2_MESSAGE)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for name in ("rank_rel", "identity", "containment"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        for name in ("t_steps", "dir_steps", "n_samples", "n_u", "n_fiber", "word_length", "equator_steps", "n_base"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise ConfigError(f"{name} must be a positive integer")
        if self.t_steps < 2 or self.dir_steps < 8:
            raise ConfigError("t_steps >= 2 and dir_steps >= 8 required")
        if self.equator_steps < 256:
            raise ConfigError("equator_steps >= 256 required")
        g = self.gap_threshold
        if isinstance(g, bool) or not isinstance(g, (int, float)) or g <= 0:
            raise ConfigError("gap_threshold must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def run_verify(config: RunConfig) -> list[CheckReport]:
    """All module checks for every p in the config, ordered by (p, check name)."""
    from . import suites
    from .higgs_fibers import HiggsPencilFamily, deformation_path_check, verify_even_identities, verify_odd_identities

    out = []
    for p in sorted(set(config.p_list)):
        checks = [
            suites.check_symspace(p, config.seed),
            suites.check_flags(p, config.seed, config.n_u),
            suites.check_hitchin(p, config.seed),
            suites.check_regularity(p, config.t_steps, config.dir_steps, config.rank_rel),
            suites.check_base(p, config.seed, config.n_u, config.n_u),
            suites.check_domain(p, config.seed, config.word_length, config.n_base, config.containment,
                                config.gap_threshold),
            deformation_path_check(HiggsPencilFamily(p), config.t_steps, config.dir_steps, config.rank_rel,
                                   seed=config.seed),
        ]
        ident = verify_odd_identities if p % 2 else verify_even_identities
        rep = ident(p, config.n_samples, config.seed)
        rep.passed = rep.max_residual <= config.identity
        checks.append(rep)
        if p == 3:
            checks.append(suites.check_chern(config.equator_steps))
        out += sorted(checks, key=lambda r: r.name)
    return out


def build_report(config: RunConfig, checks: list[CheckReport], timestamp: str | None = None) -> dict:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return {
        "header": {"version": __version__, "config_echo": config.to_dict(), "timestamp_utc": timestamp},
        "checks": [c.to_dict() for c in checks],
    }


def serialize_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def parse_report(text: str) -> tuple[dict, list[CheckReport]]:
    data = json.loads(text)
    return data["header"], [CheckReport.from_dict(c) for c in data["checks"]]


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def export_base(config: RunConfig, path: str, t: float = 0.0) -> int:
    """Write base-of-pencil samples for every p in the config as CSV; returns the row count."""
    from .higgs_fibers import HiggsPencilFamily, pencil_at
    from .pencils import base_sample
    from .pseudo_core import q_eval

    rows = []
    width = 2 * max(config.p_list) + 1
    for p in sorted(set(config.p_list)):
        pen = pencil_at(HiggsPencilFamily(p), t)
        for s in base_sample(pen, config.n_u, config.n_fiber, config.seed):
            x = s.ell.rep
            qr = q_eval(s.ell.space, x, x)
            if abs(qr) > 1e-10:
                raise RuntimeError("exported line failed the isotropy re-check")
            coords = ["%.17g" % c for c in x] + [""] * (width - len(x))
            rows.append([str(p), "%.17g" % t, str(s.u_index), str(s.fiber_index), *coords, "%.17g" % qr])
    header = ["p", "t", "u_index", "fiber_index", *[f"x{i}" for i in range(1, width + 1)], "q_residual"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return len(rows)


def _p_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid p list {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="einfibers", description="Numerical checks for fibers of Hitchin domains in Ein^{p-1,p}.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, *extra):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--p", type=_p_list, dest="p_list", help="comma separated list, e.g. 3,4")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        for name, typ in extra:
            sp.add_argument("--" + name.replace("_", "-"), type=typ, dest=name)

    common(sub.add_parser("verify", help="run every check"), ("t_steps", int), ("dir_steps", int),
           ("word_length", int), ("n_samples", int), ("n_u", int), ("n_base", int), ("equator_steps", int))
    common(sub.add_parser("sweep", help="regularity sweep of the Higgs pencils"), ("t_steps", int), ("dir_steps", int),
           ("rank_rel", float))
    bp = sub.add_parser("base", help="export base-of-pencil samples as CSV")
    common(bp, ("n_u", int), ("n_fiber", int))
    bp.add_argument("--t", type=float, default=0.0, help="deformation parameter in [0, 1]")
    common(sub.add_parser("chern", help="p = 3 Chern certificate"), ("equator_steps", int))
    common(sub.add_parser("domain", help="basepoint pencil vs sampled limit set"), ("word_length", int), ("n_base", int),
           ("gap_threshold", float))
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config).to_dict()
    for k in list(cfg):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return RunConfig.from_dict(cfg)


def _emit(args, checks: list[CheckReport], config: RunConfig):
    for c in checks:
        print(c.line())
    if args.out:
        _write(args.out, serialize_report(build_report(config, checks)))


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = _config_from_args(args)
        if args.command == "base" and not 0.0 <= args.t <= 1.0:
            raise ConfigError("t must lie in [0, 1]")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    from . import suites

    try:
        if args.command == "verify":
            checks = run_verify(config)
        elif args.command == "sweep":
            checks = [suites.check_regularity(p, config.t_steps, config.dir_steps, config.rank_rel)
                      for p in sorted(set(config.p_list))]
        elif args.command == "chern":
            checks = [suites.check_chern(config.equator_steps)]
        elif args.command == "domain":
            checks = [suites.check_domain(p, config.seed, config.word_length, config.n_base, config.containment,
                                          config.gap_threshold) for p in sorted(set(config.p_list))]
        else:
            path = args.out or "base.csv"
            n = export_base(config, path, args.t)
            print(f"wrote {n} rows to {path}")
            return EXIT_OK
        _emit(args, checks, config)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
