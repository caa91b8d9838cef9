"""Populations, coherences, current, voltage and I-V scans."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from . import units
from .hierarchy import EngineOptions, HierarchyError, build_hierarchy, steady_state
from .model import B, C, D, E, build_model, eigen_rotation

POPULATION_FLOOR = 1e-14
DEFAULT_GAMMAS = np.geomspace(900.0, 6.0, 40)


class UndefinedVoltageError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Site-basis (or eigenbasis) populations and the b/c coherence."""

    times: np.ndarray
    populations: np.ndarray  # (n_times, 5)
    coherence_bc: np.ndarray
    basis: str = "site"

    def column(self, name):
        cols = {f"rho_{s}{s}": i for i, s in enumerate("abcde")}
        if name in cols:
            return self.populations[:, cols[name]]
        if name == "re_rho_bc":
            return self.coherence_bc.real
        if name == "im_rho_bc":
            return self.coherence_bc.imag
        if name == "t_fs":
            return self.times
        raise KeyError(name)


def extract(times_fs, rho_eigen, m, basis="site"):
    """Turn eigenbasis tier-0 matrices into a :class:`TrajectoryRecord`.

    ``basis="site"`` rotates back with the b/c mixing matrix; ``"eigen"``
    keeps the ``(a, +, -, d, e)`` representation, so ``coherence_bc`` then
    holds ``rho_{+-}``.
    """
    rho = np.asarray(rho_eigen)
    if basis == "site":
        u = eigen_rotation(m).basis
        rho = np.einsum("ij,tjk,lk->til", u, rho, u)
    elif basis != "eigen":
        raise ValueError(f"unknown basis {basis!r}")
    pops = np.real(np.einsum("tii->ti", rho))
    return TrajectoryRecord(
        times=np.asarray(times_fs, dtype=float), populations=pops, coherence_bc=rho[:, B, C].copy(), basis=basis
    )


def current(gamma, rho_ss):
    """``j = Gamma rho_dd`` with unit charge."""
    return float(gamma * np.real(rho_ss[D, D]))


def voltage(m, rho_ss):
    """Effective voltage ``E_d - E_e + kT ln(rho_dd/rho_ee)`` in cm^-1."""
    dd, ee = float(np.real(rho_ss[D, D])), float(np.real(rho_ss[E, E]))
    if dd <= POPULATION_FLOOR or ee <= POPULATION_FLOOR:
        raise UndefinedVoltageError(f"voltage undefined (rho_dd = {dd:.3g}, rho_ee = {ee:.3g})")
    return m.site_energies[D] - m.site_energies[E] + m.kT * math.log(dd / ee)


@dataclass(frozen=True)
class IVPoint:
    gamma: float
    rho_dd: float
    rho_ee: float
    current: float
    voltage: float  # cm^-1, nan when undefined
    conductivity: float = math.nan
    warnings: tuple = ()

    @property
    def voltage_eV(self):
        return self.voltage * units.EV_PER_CM


@dataclass
class IVScan:
    points: list
    failures: list = field(default_factory=list)

    @property
    def complete(self):
        return not self.failures

    def negative_conductivity_regions(self):
        """Index ranges ``[i, j)`` of consecutive points with ``dj/dPhi < 0``."""
        regions, start = [], None
        for i, p in enumerate(self.points):
            neg = np.isfinite(p.conductivity) and p.conductivity < 0
            if neg and start is None:
                start = i
            if not neg and start is not None:
                regions.append((start, i))
                start = None
        if start is not None:
            regions.append((start, len(self.points)))
        return regions


def _scan_point(args):
    config, gamma, options = args
    m = build_model(config)
    m = m.replace(release_rate=float(gamma))
    h = build_hierarchy(m, options)
    rho = steady_state(h).rho
    return rho


def conductivity(current_vals, voltage_vals):
    """``dj/dPhi`` by central differences (one-sided at the ends)."""
    j = np.asarray(current_vals, dtype=float)
    phi = np.asarray(voltage_vals, dtype=float)
    if len(j) < 2:
        return np.full(len(j), np.nan)
    steps = np.diff(phi)
    if np.any(steps == 0) or not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("voltage grid is not strictly monotone; conductivity undefined")
    return np.gradient(j, phi)


def iv_scan(config=None, gammas=None, options=None, workers=1):
    """Steady states over a list of release rates.

    Parameters
    ----------
    config : ModelConfig or mapping, optional
        Model parameters; ``Gamma`` is overridden per point.
    gammas : sequence of float
        Release rates in cm^-1, positive and strictly descending.
    options : EngineOptions
    workers : int
        Process-pool size; 1 runs serially.
    """
    gammas = DEFAULT_GAMMAS if gammas is None else np.asarray(gammas, dtype=float)
    if len(gammas) == 0:
        raise ValueError("empty gamma list")
    if np.any(gammas <= 0):
        raise ValueError("release rates must be positive")
    if np.any(np.diff(gammas) >= 0):
        raise ValueError("release rates must be strictly descending")
    options = options or EngineOptions()
    m = build_model(config)
    jobs = [(config, g, options) for g in gammas]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_scan_point, job) for job in jobs]
            outcomes = [_collect(f.result) for f in futures]
    else:
        outcomes = [_collect(lambda job=job: _scan_point(job)) for job in jobs]

    points, failures = [], []
    for g, (rho, err) in zip(gammas, outcomes):
        if rho is None:
            warnings.warn(f"Gamma = {g:g}: {err}")
            failures.append((float(g), str(err)))
            continue
        notes = []
        try:
            phi = voltage(m, rho)
        except UndefinedVoltageError:
            phi = math.nan
            notes.append("undefined (rho_dd ~ 0)")
        points.append(
            IVPoint(
                gamma=float(g),
                rho_dd=float(np.real(rho[D, D])),
                rho_ee=float(np.real(rho[E, E])),
                current=current(g, rho),
                voltage=phi,
                warnings=tuple(notes),
            )
        )
    return IVScan(_with_conductivity(points), failures)


def _collect(fn):
    try:
        return fn(), None
    except (HierarchyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return None, exc


def _with_conductivity(points):
    phi = np.array([p.voltage for p in points])
    ok = np.isfinite(phi)
    cond = np.full(len(points), math.nan)
    flags = [list(p.warnings) for p in points]
    if ok.sum() >= 2:
        idx = np.flatnonzero(ok)
        steps = np.diff(phi[idx])
        direction = np.sign(np.median(steps))
        good = [idx[0]]
        for i in idx[1:]:
            # keep the scan monotone; rows that break it are flagged instead
            if np.sign(phi[i] - phi[good[-1]]) == direction and phi[i] != phi[good[-1]]:
                good.append(i)
            else:
                flags[i].append("non-monotone voltage")
        if len(good) >= 2:
            cond[good] = conductivity([points[i].current for i in good], phi[good])
    return [
        IVPoint(p.gamma, p.rho_dd, p.rho_ee, p.current, p.voltage, float(c), tuple(f))
        for p, c, f in zip(points, cond, flags)
    ]


def release_flux(m, rho):
    """Population flow into ``|e>`` from the release channel alone."""
    from .dissipators import release_superop

    return float(np.real(release_superop(m.release_rate)(rho)[E, E]))
