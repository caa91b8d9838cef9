"""Command-line front end: propagate, iv-scan, bath-check, converge."""

import argparse
import configparser
import csv
from dataclasses import asdict, dataclass, field
import json
import math
import os
import sys
import warnings

import numpy as np

from . import units
from .bath import QuadratureError, classical_limit, decompose, verify_decomposition
from .hierarchy import (
    BACKENDS,
    DEFAULT_DEPTH,
    EngineOptions,
    HierarchyError,
    PropagationError,
    build_hierarchy,
    convergence_report,
    propagate,
)
from .model import ConfigError, ModelConfig, PHONON_MODES, build_model, eigen_rotation
from .observables import DEFAULT_GAMMAS, extract, iv_scan

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4

TRAJECTORY_HEADER = ["t_fs", "rho_aa", "rho_bb", "rho_cc", "rho_dd", "rho_ee", "re_rho_bc", "im_rho_bc"]
IV_HEADER = ["gamma_cm1", "rho_dd", "rho_ee", "current", "voltage_cm1", "voltage_eV", "conductivity", "warnings"]
BATH_HEADER = ["t_fs", "re_series", "im_series", "re_quad", "im_quad", "abs_err"]
CONVERGENCE_HEADER = ["parameter", "a", "b", "observable", "difference", "relative"]


@dataclass
class RunConfig:
    """Everything a subcommand needs; defaults reproduce the reference setup."""

    model: ModelConfig = field(default_factory=ModelConfig)
    backend: str = "deom"
    depth: int = DEFAULT_DEPTH
    scheme: str = "pade"
    n_terms: int = 2
    t_final_fs: float = 1000.0
    output_stride_fs: float = 1.0
    rtol: float = 1e-8
    atol: float = 1e-10
    gammas: list = field(default_factory=lambda: [float(g) for g in DEFAULT_GAMMAS])
    workers: int = 1
    bath_mode: int = 2
    bath_classical: bool = False
    bath_t_max_fs: float = 500.0
    bath_samples: int = 50
    converge_depths: list = field(default_factory=lambda: [4, 6, 8])
    converge_terms: list = field(default_factory=list)
    converge_times_fs: list = field(default_factory=list)
    output: str = "."

    def validate(self):
        if self.backend not in BACKENDS:
            raise ConfigError("backend", f"unknown backend {self.backend!r}; choose from {BACKENDS}")
        if self.depth < 0:
            raise ConfigError("depth", "must be >= 0")
        if self.scheme not in ("pade", "matsubara"):
            raise ConfigError("scheme", f"unknown decomposition scheme {self.scheme!r}")
        if self.n_terms < 0:
            raise ConfigError("n_terms", "must be >= 0")
        if not self.t_final_fs > 0:
            raise ConfigError("t_final_fs", "must be > 0")
        if not self.output_stride_fs > 0:
            raise ConfigError("output_stride_fs", "must be > 0")
        n = self.t_final_fs / self.output_stride_fs
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ConfigError("output_stride_fs", "must divide t_final_fs")
        if self.bath_mode not in PHONON_MODES:
            raise ConfigError("bath_mode", f"must be one of {PHONON_MODES}")
        build_model(self.model)
        return self

    def engine_options(self):
        return EngineOptions(backend=self.backend, depth=self.depth, scheme=self.scheme, n_terms=self.n_terms)

    def to_mapping(self):
        out = asdict(self)
        out["model"] = self.model.to_mapping()
        out.pop("output")
        return out


# -- config ingestion ------------------------------------------------------------

_SECTIONS = {
    "run": {"backend": str, "depth": int, "workers": int},
    "decomposition": {"scheme": str, "n_terms": int},
    "propagation": {"t_final_fs": float, "output_stride_fs": float, "rtol": float, "atol": float},
    "scan": {},
    "bath": {"mode": int, "classical": bool, "t_max_fs": float, "samples": int},
    "converge": {"depths": "ints", "terms": "ints", "times_fs": "floats"},
    "output": {"directory": str},
}


def _parse_list(text, kind):
    items = [x for x in text.replace(",", " ").split() if x]
    return [kind(x) for x in items]


def _convert(section, key, raw, kind):
    try:
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if kind == "ints":
            return _parse_list(raw, int)
        if kind == "floats":
            return _parse_list(raw, float)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}") from None


def _scan_gammas(sec):
    if "gammas" in sec:
        return _parse_list(sec["gammas"], float)
    try:
        lo = float(sec.get("gamma_min", 6.0))
        hi = float(sec.get("gamma_max", 900.0))
        n = int(sec.get("n_points", 40))
    except ValueError as exc:
        raise ConfigError("scan", str(exc)) from None
    if lo <= 0 or hi <= lo or n < 1:
        raise ConfigError("scan", "need 0 < gamma_min < gamma_max and n_points >= 1")
    return [float(g) for g in np.geomspace(hi, lo, n)]


def config_from_ini(text):
    """Parse the sectioned key-value format; an empty text gives the defaults."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from None
    for name in cp.sections():
        if name not in _SECTIONS and name != "model":
            raise ConfigError(name, "unknown section")
    model = ModelConfig.from_mapping(dict(cp["model"])) if cp.has_section("model") else ModelConfig()
    kw = {"model": model}
    rename = {
        ("bath", "mode"): "bath_mode",
        ("bath", "classical"): "bath_classical",
        ("bath", "t_max_fs"): "bath_t_max_fs",
        ("bath", "samples"): "bath_samples",
        ("converge", "depths"): "converge_depths",
        ("converge", "terms"): "converge_terms",
        ("converge", "times_fs"): "converge_times_fs",
        ("output", "directory"): "output",
    }
    for name, keys in _SECTIONS.items():
        if not cp.has_section(name):
            continue
        sec = cp[name]
        if name == "scan":
            kw["gammas"] = _scan_gammas(sec)
            continue
        for key, raw in sec.items():
            if key not in keys:
                raise ConfigError(f"{name}.{key}", "unknown key")
            kw[rename.get((name, key), key)] = _convert(name, key, raw, keys[key])
    return RunConfig(**kw).validate()


def config_from_json(text):
    """Rebuild a :class:`RunConfig` from a ``run.json`` echo."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    data = dict(data.get("config", data))
    model = ModelConfig.from_mapping(data.pop("model", {}))
    known = set(RunConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown run parameter")
    return RunConfig(model=model, **data).validate()


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None
    if path.endswith(".json"):
        return config_from_json(text)
    return config_from_ini(text)


def apply_overrides(cfg, args):
    if args.backend is not None:
        cfg.backend = args.backend
    if args.gamma is not None:
        cfg.model.Gamma = args.gamma
    if args.eta is not None:
        cfg.model.eta = args.eta
        cfg.model.eta_matrix = None
    if args.depth is not None:
        cfg.depth = args.depth
    if args.out is not None:
        cfg.output = args.out
    if cfg.backend == "lindblad" and args.depth is not None:
        warnings.warn("depth is ignored by the lindblad backend")
    return cfg.validate()


# -- output -----------------------------------------------------------------------


def fmt(x):
    """12 significant digits, always with a decimal point or exponent; NaN is empty."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    if x == 0:
        return "0.0"
    s = f"{x:.12g}"
    if not any(c in s for c in ".eni"):
        s += ".0"
    return s


def write_csv(path, header, rows, footer=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
        if footer:
            fh.write(footer + "\n")


def write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg):
    os.makedirs(cfg.output, exist_ok=True)
    return cfg.output


def run_metadata(cfg, hier=None):
    m = build_model(cfg.model)
    rot = eigen_rotation(m)
    meta = {
        "config": cfg.to_mapping(),
        "U": rot.mixing.tolist(),
        "eigen_energies_cm1": rot.energies.tolist(),
        "fs_per_internal_time": units.FS_PER_INTERNAL,
    }
    if hier is not None:
        meta["modes"] = [md.to_mapping() for md in hier.modes]
        meta["n_ados"] = hier.n_ados
    return meta


# -- subcommands -------------------------------------------------------------------


def trajectory_rows(record):
    cols = [record.column(name) for name in TRAJECTORY_HEADER]
    return list(zip(*cols))


def cmd_propagate(cfg):
    m = build_model(cfg.model)
    hier = build_hierarchy(m, cfg.engine_options())
    out = _outdir(cfg)
    write_json(os.path.join(out, "run.json"), run_metadata(cfg, hier))
    path = os.path.join(out, "trajectory.csv")
    try:
        traj = propagate(
            hier, t_final_fs=cfg.t_final_fs, stride_fs=cfg.output_stride_fs, rtol=cfg.rtol, atol=cfg.atol
        )
    except PropagationError as exc:
        if exc.partial is not None:
            times, rho = exc.partial
            write_csv(path, TRAJECTORY_HEADER, trajectory_rows(extract(times, rho, m)), footer=f"# partial: {exc}")
        raise
    write_csv(path, TRAJECTORY_HEADER, trajectory_rows(extract(traj.times_fs, traj.rho, m)))
    return EXIT_OK


def cmd_iv_scan(cfg):
    if not cfg.gammas:
        raise ConfigError("scan.gammas", "empty gamma list")
    gammas = sorted(cfg.gammas, reverse=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scan = iv_scan(cfg.model, gammas, cfg.engine_options(), workers=cfg.workers)
    rows = []
    failed = dict(scan.failures)
    by_gamma = {p.gamma: p for p in scan.points}
    for g in gammas:
        p = by_gamma.get(float(g))
        if p is None:
            rows.append([g, None, None, None, None, None, None, f"failed: {failed.get(float(g), '')}"])
            continue
        rows.append(
            [p.gamma, p.rho_dd, p.rho_ee, p.current, p.voltage, p.voltage_eV, p.conductivity, "; ".join(p.warnings)]
        )
    out = _outdir(cfg)
    write_csv(os.path.join(out, "iv.csv"), IV_HEADER, rows)
    write_json(os.path.join(out, "run.json"), run_metadata(cfg))
    undefined = sum(1 for p in scan.points if math.isnan(p.voltage))
    if undefined:
        print(f"warning: voltage undefined (rho_dd ~ 0) at {undefined} of {len(gammas)} points", file=sys.stderr)
    return EXIT_OK if scan.complete else EXIT_PARTIAL


def cmd_bath_check(cfg):
    m = build_model(cfg.model)
    j = m.spectral_density(cfg.bath_mode)
    series = decompose(j, m.beta, scheme=cfg.scheme, n_terms=cfg.n_terms)
    if cfg.bath_classical:
        series = classical_limit(series)
    t_max = units.fs_to_internal(cfg.bath_t_max_fs)
    err, t, ser, quad = verify_decomposition(series, j, m.beta, t_max, cfg.bath_samples, return_samples=True)
    if cfg.bath_classical:
        # the classical reference is the real part of the exact correlation function
        quad = quad.real.astype(complex)
        err = float(np.max(np.abs(ser - quad)) / np.max(np.abs(quad)))
    rows = [
        (units.internal_to_fs(ti), s.real, s.imag, q.real, q.imag, abs(s - q)) for ti, s, q in zip(t, ser, quad)
    ]
    out = _outdir(cfg)
    write_csv(os.path.join(out, "bath.csv"), BATH_HEADER, rows)
    print(f"max relative error: {err:.6e}")
    return EXIT_OK


def cmd_converge(cfg):
    m = build_model(cfg.model)
    depths = list(dict.fromkeys(cfg.converge_depths))
    terms = list(dict.fromkeys(cfg.converge_terms))
    if len(depths) < 2 and len(terms) < 2:
        print("note: need at least two depths or term counts; nothing to compare")
    rows = convergence_report(
        m,
        depths=depths,
        scheme_terms=terms,
        backend=cfg.backend,
        times_fs=cfg.converge_times_fs,
        stride_fs=cfg.output_stride_fs,
        scheme=cfg.scheme,
        n_terms=cfg.n_terms,
        depth=cfg.depth,
    )
    out = _outdir(cfg)
    write_csv(
        os.path.join(out, "convergence.csv"),
        CONVERGENCE_HEADER,
        [(r.parameter, str(r.a), str(r.b), r.observable, r.difference, r.relative) for r in rows],
    )
    return EXIT_OK


COMMANDS = {
    "propagate": cmd_propagate,
    "iv-scan": cmd_iv_scan,
    "bath-check": cmd_bath_check,
    "converge": cmd_converge,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="deomlab", description="Mixed DEOM/Lindblad heat-engine simulations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI config or a run.json from a previous run")
        p.add_argument("--out", help="output directory")
        p.add_argument("--backend", choices=BACKENDS)
        p.add_argument("--gamma", type=float, help="release rate in cm^-1")
        p.add_argument("--eta", type=float, help="correlation between the b and c dephasing modes")
        p.add_argument("--depth", type=int, help="hierarchy depth")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HierarchyError, QuadratureError, ArithmeticError, np.linalg.LinAlgError, MemoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
