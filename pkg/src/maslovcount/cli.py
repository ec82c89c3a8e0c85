"""Command-line interface.

Commands: ``classify``, ``count``, ``box``, ``curves``, ``validate`` and
``propagate``. A run is described by a :class:`RunConfig`, read from an INI
style file (``--config``) and then overridden by individual flags. Complex
numbers are written ``re+imi`` and every CSV number uses the shortest
round-trip decimal form, so identical inputs give byte-identical outputs.

Exit status is 0 on success, 1 when ``validate`` finds a failed check, 2 on a
contract violation and 3 on a numerical failure. Failures print a line
``error: <Reason>: <message>`` to standard error.
"""

import argparse
import configparser
import csv
import math
import os
import sys as _sys
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .count import EigencountRequest, count, default_depth, niessen_basis_at, spectral_curves
from .endpoint import ProbePlan, classify_endpoint, niessen_curve
from .errors import ContractViolation, MaslovCountError
from .propagate import fundamental_matrix, symplectic_drift
from .system import AtkinsonProbe, HamiltonianSystem, alpha_matrix, builtin_system, validate_assumptions

COMMANDS = ("classify", "count", "box", "curves", "validate", "propagate")
SECTIONS = ("system", "spectral", "boundary", "truncation", "tolerances", "output")


# ----------------------------------------------------------------------------
# Value formats
# ----------------------------------------------------------------------------


def format_float(v: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(v))


def format_complex(z: complex) -> str:
    """Write ``z`` as ``re+imi`` (always with both parts)."""
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{float(z.real)!r}{sign}{abs(float(z.imag))!r}i"


def parse_complex(text: str) -> complex:
    """Parse ``re+imi``, ``re``, ``imi`` or ``i`` (a trailing ``j`` is also accepted)."""
    s = str(text).strip().replace(" ", "").lower()
    if not s:
        raise ContractViolation("empty complex number")
    if s.endswith("i"):
        s = s[:-1] + "j"
    if s.endswith(("+j", "-j")) or s == "j":
        s = s[:-1] + "1j"
    try:
        return complex(s)
    except ValueError as exc:
        raise ContractViolation(f"cannot parse complex number {text!r}") from exc


def parse_list(text: str) -> tuple[complex, ...]:
    """Parse a bracketed or bare comma-separated list of complex entries (row major)."""
    s = str(text).replace("[", " ").replace("]", " ").replace(";", ",")
    items = [t for t in (p.strip() for p in s.split(",")) if t]
    if not items:
        raise ContractViolation(f"empty list {text!r}")
    return tuple(parse_complex(t) for t in items)


def format_list(values: Sequence[complex]) -> str:
    """Write a list as ``[v1, v2, ...]`` with complex entries."""
    return "[" + ", ".join(format_complex(v) for v in values) + "]"


def _parse_float(text: str) -> float:
    try:
        return float(str(text).strip())
    except ValueError as exc:
        raise ContractViolation(f"cannot parse number {text!r}") from exc


# ----------------------------------------------------------------------------
# Run configuration
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs.

    ``None`` fields fall back to the built-in system's reference settings.

    Attributes:
        system: Built-in system name.
        params: System parameters as text.
        lambda0: Non-real parameter for classification and boundary frames.
        lambda1: Lower end of the counting interval.
        lambda2: Upper end of the counting interval.
        endpoint: Endpoint for ``classify`` and for a bare ``--beta``.
        alpha: Boundary row at a regular left endpoint.
        alpha_b: Boundary row at a regular right endpoint.
        beta_a: Circle parameters at a singular left endpoint.
        beta_b: Circle parameters at a singular right endpoint.
        x_max: Right end of the counting path.
        x_min_offset: Start of the counting path measured from a singular ``a``.
        extension: Distance beyond ``x_max`` from which the right frame is carried back.
        probe_a: Deepest probe offset toward a singular ``a``.
        probe_b: Deepest real-λ probe toward a singular ``b``.
        probe_count: Number of classification probes.
        curve_samples: Number of λ values for ``curves``.
        tol_ode: Relative integrator tolerance (absolute is 1/100 of it).
        tol_flow: Kernel threshold for intersection dimensions.
        plateau: Relative variation below which a track is settled.
        divergence_factor: Growth factor above which a track diverges.
        out: Output directory for reports and CSV files.
        seed: Seed for the random solutions drawn by ``validate``.
    """

    system: str = "schrodinger_gap"
    params: dict = field(default_factory=dict)
    lambda0: complex | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    endpoint: str | None = None
    alpha: tuple[complex, ...] | None = None
    alpha_b: tuple[complex, ...] | None = None
    beta_a: tuple[complex, ...] | None = None
    beta_b: tuple[complex, ...] | None = None
    x_max: float | None = None
    x_min_offset: float | None = None
    extension: float | None = None
    probe_a: float | None = None
    probe_b: float | None = None
    probe_count: int = 40
    curve_samples: int = 12
    tol_ode: float | None = None
    tol_flow: float | None = None
    plateau: float | None = None
    divergence_factor: float | None = None
    out: str | None = None
    seed: int = 0

    def tolerances(self) -> Tolerances:
        """Default tolerances with this run's overrides applied."""
        tol = DEFAULT_TOLERANCES
        if self.tol_ode is not None:
            tol = tol.with_ode(self.tol_ode, self.tol_ode * 1e-2)
        if self.tol_flow is not None:
            tol = replace(tol, kernel=self.tol_flow)
        if self.plateau is not None:
            tol = replace(tol, plateau=self.plateau)
        if self.divergence_factor is not None:
            tol = replace(tol, divergence_factor=self.divergence_factor)
        return tol

    def build_system(self) -> HamiltonianSystem:
        """Instantiate the configured system."""
        return builtin_system(self.system, self.params)


# Config key -> (section, field, parser, formatter)
_KEYS = {
    "name": ("system", "system", str, str),
    "lambda0": ("spectral", "lambda0", parse_complex, format_complex),
    "lambda1": ("spectral", "lambda1", _parse_float, format_float),
    "lambda2": ("spectral", "lambda2", _parse_float, format_float),
    "curve_samples": ("spectral", "curve_samples", int, str),
    "endpoint": ("boundary", "endpoint", str, str),
    "alpha": ("boundary", "alpha", parse_list, format_list),
    "alpha_b": ("boundary", "alpha_b", parse_list, format_list),
    "beta_a": ("boundary", "beta_a", parse_list, format_list),
    "beta_b": ("boundary", "beta_b", parse_list, format_list),
    "x_max": ("truncation", "x_max", _parse_float, format_float),
    "x_min_offset": ("truncation", "x_min_offset", _parse_float, format_float),
    "extension": ("truncation", "extension", _parse_float, format_float),
    "probe_a": ("truncation", "probe_a", _parse_float, format_float),
    "probe_b": ("truncation", "probe_b", _parse_float, format_float),
    "probe_count": ("truncation", "probe_count", int, str),
    "ode": ("tolerances", "tol_ode", _parse_float, format_float),
    "flow": ("tolerances", "tol_flow", _parse_float, format_float),
    "plateau": ("tolerances", "plateau", _parse_float, format_float),
    "divergence_factor": ("tolerances", "divergence_factor", _parse_float, format_float),
    "dir": ("output", "out", str, str),
    "seed": ("output", "seed", int, str),
}
_DEFAULTS = RunConfig()


def parse_config(text: str) -> RunConfig:
    """Parse configuration text.

    The format has bracketed section headers and ``key = value`` lines.
    Sections are ``system``, ``spectral``, ``boundary``, ``truncation``,
    ``tolerances`` and ``output``. Keys of ``[system]`` other than ``name``
    are passed to the system as parameters.

    Raises:
        ContractViolation: on unknown sections or keys and unparsable values.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ContractViolation(f"malformed configuration: {exc}") from exc
    values: dict = {}
    params: dict = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ContractViolation(f"unknown configuration section [{section}]")
        for key, raw in cp.items(section):
            spec = _KEYS.get(key)
            if spec is None or spec[0] != section:
                if section == "system":
                    params[key] = raw.strip()
                    continue
                raise ContractViolation(f"unknown key {key!r} in [{section}]")
            values[spec[1]] = spec[2](raw.strip())
    return RunConfig(params=params, **values)


def emit_config(cfg: RunConfig) -> str:
    """Canonical text of a configuration (only fields that differ from the defaults)."""
    out = []
    for section in SECTIONS:
        lines = []
        for key, (sec, name, _, fmt) in _KEYS.items():
            if sec != section:
                continue
            value = getattr(cfg, name)
            if value is None or (value == getattr(_DEFAULTS, name) and name != "system"):
                continue
            lines.append(f"{key} = {fmt(value)}")
        if section == "system":
            lines += [f"{k} = {cfg.params[k]}" for k in sorted(cfg.params)]
        if lines:
            out.append(f"[{section}]")
            out += lines
            out.append("")
    return "\n".join(out)


def load_config(path: str) -> RunConfig:
    """Read a configuration file."""
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ContractViolation(f"cannot read configuration {path!r}: {exc}") from exc


# ----------------------------------------------------------------------------
# Shared helpers
# ----------------------------------------------------------------------------


def _out_path(cfg: RunConfig, name: str) -> str | None:
    if cfg.out is None:
        return None
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _write_rows(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_text(cfg: RunConfig, name: str, text: str) -> None:
    path = _out_path(cfg, name)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _singular_endpoints(s: HamiltonianSystem) -> list[str]:
    return [e for e in ("a", "b") if s.endpoint_kind(e) == "singular"]


def _lambda0(cfg: RunConfig, s: HamiltonianSystem) -> complex:
    return complex(s.defaults.lambda0 if cfg.lambda0 is None else cfg.lambda0)


def _beta(cfg: RunConfig, s: HamiltonianSystem, endpoint: str):
    beta = cfg.beta_a if endpoint == "a" else cfg.beta_b
    if beta is None:
        beta = s.defaults.beta_a if endpoint == "a" else s.defaults.beta_b
    return None if beta is None else list(beta)


def build_request(cfg: RunConfig) -> EigencountRequest:
    """Turn a configuration into a count request (classifying singular endpoints at λ0)."""
    s = cfg.build_system()
    d = s.defaults
    tol = cfg.tolerances()
    lam0 = _lambda0(cfg, s)
    alpha = alpha_b = basis_a = basis_b = None
    if s.kind_a == "regular":
        alpha = alpha_matrix(cfg.alpha if cfg.alpha is not None else (d.alpha or (1.0, 0.0)))
    else:
        depth = s.a + cfg.probe_a if cfg.probe_a is not None and math.isfinite(s.a) else None
        basis_a = niessen_basis_at(s, "a", lam0, _beta(cfg, s, "a"), depth, cfg.probe_count, tol)
    if s.kind_b == "regular":
        alpha_b = alpha_matrix(cfg.alpha_b if cfg.alpha_b is not None else (1.0, 0.0))
    elif _beta(cfg, s, "b") is not None:
        basis_b = niessen_basis_at(s, "b", lam0, _beta(cfg, s, "b"), None, cfg.probe_count, tol)
    x_min = None
    if s.kind_a == "singular" and cfg.x_min_offset is not None:
        x_min = s.a + cfg.x_min_offset
    probe_a = None
    if cfg.probe_a is not None and math.isfinite(s.a):
        probe_a = s.a + cfg.probe_a
    return EigencountRequest(
        sys=s,
        lambda1=d.lambda1 if cfg.lambda1 is None else cfg.lambda1,
        lambda2=d.lambda2 if cfg.lambda2 is None else cfg.lambda2,
        alpha=alpha,
        basis_a=basis_a,
        basis_b=basis_b,
        alpha_b=alpha_b,
        x_min=x_min,
        x_max=cfg.x_max,
        extension=cfg.extension,
        probe_a=probe_a,
        probe_b=cfg.probe_b,
        probe_count=cfg.probe_count,
        tol=tol,
    )


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig) -> tuple[int, str]:
    """Classify the requested (or every) singular endpoint at λ0."""
    s = cfg.build_system()
    tol = cfg.tolerances()
    lam0 = _lambda0(cfg, s)
    ends = [cfg.endpoint] if cfg.endpoint else _singular_endpoints(s)
    lines = [f"system: {s.name}", f"lambda0: {format_complex(lam0)}"]
    for e in ends:
        if s.endpoint_kind(e) != "singular":
            raise ContractViolation(f"endpoint {e} of {s.name} is regular")
        kind = "B" if lam0.imag == 0 else "A"
        depth = default_depth(s, e, kind)
        if e == "a" and cfg.probe_a is not None and math.isfinite(s.a):
            depth = s.a + cfg.probe_a
        if e == "b" and cfg.probe_b is not None:
            depth = cfg.probe_b
        curve = niessen_curve(s, kind, lam0, ProbePlan.toward(s, e, depth, cfg.probe_count), tol)
        cls = classify_endpoint(curve, tol)
        lines += [
            f"endpoint: {e}",
            f"  kind: {cls.kind}",
            f"  x_final: {format_float(cls.x_final)}",
            f"  m: {cls.m}",
            f"  case: {cls.case}",
            f"  limits: {' '.join(format_float(v) for v in cls.limits)}",
            f"  finite: {' '.join(str(f).lower() for f in cls.finite)}",
        ]
        for j in range(cls.vectors.shape[1]):
            lines.append(f"  vector_{j + 1}: {' '.join(format_complex(z) for z in cls.vectors[:, j])}")
        for j, mag in sorted(cls.divergence.items()):
            lines.append(f"  divergent_{int(j) + 1}: {format_float(mag)}")
        path = _out_path(cfg, f"curve_{e}.csv")
        if path is not None:
            curve.to_csv(path)
    text = "\n".join(lines)
    _write_text(cfg, "classify.txt", text)
    return 0, text


def _count_artifacts(cfg: RunConfig, report) -> None:
    path = _out_path(cfg, "conjugate_points.csv")
    if path is not None:
        report.shelf.points_to_csv(path)
        report.shelf.phases_to_csv(_out_path(cfg, "eigenphases.csv"))
        _write_rows(
            _out_path(cfg, "nullity.csv"),
            ["x", "multiplicity"],
            [[format_float(x), m] for x, m in report.nullity.locations],
        )


def cmd_count(cfg: RunConfig) -> tuple[int, str]:
    """Count eigenvalues on ``[λ1, λ2)``."""
    report = count(build_request(cfg))
    _count_artifacts(cfg, report)
    text = report.to_text()
    _write_text(cfg, "report.txt", text)
    return 0, text


def cmd_box(cfg: RunConfig) -> tuple[int, str]:
    """Count and evaluate the full four-shelf contour."""
    report = count(build_request(cfg), box=True)
    _count_artifacts(cfg, report)
    for name, res in report.box.shelves.items():
        path = _out_path(cfg, f"shelf_{name}_points.csv")
        if path is not None:
            res.points_to_csv(path)
            res.phases_to_csv(_out_path(cfg, f"shelf_{name}_phases.csv"))
    text = report.to_text()
    _write_text(cfg, "box.txt", text)
    return 0, text


def cmd_curves(cfg: RunConfig) -> tuple[int, str]:
    """Trace conjugate-point loci over an evenly spaced λ grid in ``[λ1, λ2)``."""
    req = build_request(cfg)
    lams = np.linspace(req.lambda1, req.lambda2, cfg.curve_samples, endpoint=False)
    sc = spectral_curves(req, lams)
    path = _out_path(cfg, "curves.csv")
    if path is not None:
        _write_rows(path, ["curve", "lambda", "x"], [[k, format_float(l), format_float(x)] for k, l, x in sc.to_rows()])
    lines = [
        f"curves: {len(sc.loci)}",
        f"monotone: {str(sc.is_monotone()).lower()}",
        f"left_shelf: {sc.left_shelf.index}",
    ]
    if sc.top_shelf is not None:
        lines.append(f"top_shelf: {sc.top_shelf.index}")
    for lam, pts in zip(sc.lambdas, sc.points):
        lines.append(f"lambda {format_float(lam)}: {' '.join(f'{x:.6g}' for x in pts) or 'none'}")
    text = "\n".join(lines)
    _write_text(cfg, "curves.txt", text)
    return 0, text


def cmd_validate(cfg: RunConfig) -> tuple[int, str]:
    """Check Hermiticity and Atkinson positivity on a compact interval near the anchor."""
    s = cfg.build_system()
    lo = s.a if math.isfinite(s.a) else s.anchor - 10.0
    hi = s.b if math.isfinite(s.b) else s.anchor + 10.0
    c = max(lo, s.anchor - 5.0)
    d = min(hi, s.anchor + 5.0)
    if c <= s.a:
        c = s.a + (d - s.a) * 1e-3 if s.kind_a == "singular" else s.a
    if d >= s.b and s.kind_b == "singular":
        d = s.b - (s.b - c) * 1e-3
    rep = validate_assumptions(s, AtkinsonProbe(c=c, d=d, seed=cfg.seed), cfg.tolerances())
    lines = [
        f"system: {s.name}",
        f"interval: {format_float(c)} {format_float(d)}",
        f"hermiticity_defect: {rep.hermiticity_defect:.3e}",
        f"hermitian: {'pass' if rep.hermitian_pass else 'fail'}",
        f"atkinson_quadratures: {' '.join(f'{q:.6g}' for q in rep.quadratures)}",
        f"atkinson: {'pass' if rep.atkinson_pass else 'fail'}",
        f"limit_hypothesis: {rep.limit_hypothesis}",
        f"passed: {str(rep.passed).lower()}",
    ]
    text = "\n".join(lines)
    _write_text(cfg, "validate.txt", text)
    return (0 if rep.passed else 1), text


def cmd_propagate(cfg: RunConfig) -> tuple[int, str]:
    """Fundamental matrix from the anchor to ``x_max`` at λ0, with its symplectic drift."""
    s = cfg.build_system()
    tol = cfg.tolerances()
    lam = _lambda0(cfg, s)
    x = cfg.x_max if cfg.x_max is not None else s.anchor + 1.0
    xs = np.linspace(s.anchor, x, 21)
    traj = fundamental_matrix(s, lam, xs, tol)
    bar = traj if lam.imag == 0 else fundamental_matrix(s, lam.conjugate(), xs, tol)
    lines = [
        f"system: {s.name}",
        f"lambda: {format_complex(lam)}",
        f"x: {format_float(x)}",
        f"symplectic_drift: {symplectic_drift(traj, bar):.3e}",
        f"relative_drift: {symplectic_drift(traj, bar, relative=True):.3e}",
    ]
    phi = traj.at(x)
    for i in range(phi.shape[0]):
        lines.append(f"phi_row_{i + 1}: {' '.join(format_complex(z) for z in phi[i])}")
    path = _out_path(cfg, "fundamental.csv")
    if path is not None:
        dim = s.dim
        header = ["x"] + [f"{p}_{i}{j}" for i in range(dim) for j in range(dim) for p in ("re", "im")]
        rows = []
        for xv, m in zip(traj.xs, traj.values):
            row = [format_float(xv)]
            for z in m.ravel():
                row += [format_float(z.real), format_float(z.imag)]
            rows.append(row)
        _write_rows(path, header, rows)
    text = "\n".join(lines)
    _write_text(cfg, "propagate.txt", text)
    return 0, text


HANDLERS = {
    "classify": cmd_classify,
    "count": cmd_count,
    "box": cmd_box,
    "curves": cmd_curves,
    "validate": cmd_validate,
    "propagate": cmd_propagate,
}


# ----------------------------------------------------------------------------
# Argument handling
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    """Argument parser shared by every command."""
    parser = argparse.ArgumentParser(prog="maslovcount", description="Eigenvalue counts for singular Hamiltonian systems.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH")
    parser.add_argument("--system", metavar="NAME")
    parser.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="system parameter")
    parser.add_argument("--endpoint", choices=("a", "b"))
    parser.add_argument("--lambda0")
    parser.add_argument("--lambda1", type=float)
    parser.add_argument("--lambda2", type=float)
    parser.add_argument("--alpha", help='boundary row "a1,a2,..."')
    parser.add_argument("--alpha-b", help="boundary row at a regular right endpoint")
    parser.add_argument("--beta", help='circle parameters "re+imi,..." at --endpoint (default a)')
    parser.add_argument("--xmax", type=float)
    parser.add_argument("--xmin-offset", type=float)
    parser.add_argument("--extension", type=float)
    parser.add_argument("--probe-a", type=float)
    parser.add_argument("--probe-b", type=float)
    parser.add_argument("--probe-count", type=int)
    parser.add_argument("--curve-samples", type=int)
    parser.add_argument("--tol-ode", type=float)
    parser.add_argument("--tol-flow", type=float)
    parser.add_argument("--plateau", type=float)
    parser.add_argument("--divergence-factor", type=float)
    parser.add_argument("--out", metavar="DIR")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--emit-config", action="store_true", help="print the canonical configuration and stop")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    """Merge a configuration file with command-line overrides."""
    cfg = load_config(ns.config) if ns.config else RunConfig()
    upd: dict = {}
    if ns.system is not None:
        upd["system"] = ns.system
        upd["params"] = {}
    if ns.param:
        params = dict(upd.get("params", cfg.params))
        for item in ns.param:
            key, sep, value = item.partition("=")
            if not sep:
                raise ContractViolation(f"--param needs KEY=VALUE, got {item!r}")
            params[key.strip()] = value.strip()
        upd["params"] = params
    simple = {
        "endpoint": "endpoint",
        "lambda1": "lambda1",
        "lambda2": "lambda2",
        "xmax": "x_max",
        "xmin_offset": "x_min_offset",
        "extension": "extension",
        "probe_a": "probe_a",
        "probe_b": "probe_b",
        "probe_count": "probe_count",
        "curve_samples": "curve_samples",
        "tol_ode": "tol_ode",
        "tol_flow": "tol_flow",
        "plateau": "plateau",
        "divergence_factor": "divergence_factor",
        "out": "out",
        "seed": "seed",
    }
    for arg, name in simple.items():
        value = getattr(ns, arg)
        if value is not None:
            upd[name] = value
    if ns.lambda0 is not None:
        upd["lambda0"] = parse_complex(ns.lambda0)
    if ns.alpha is not None:
        upd["alpha"] = parse_list(ns.alpha)
    if ns.alpha_b is not None:
        upd["alpha_b"] = parse_list(ns.alpha_b)
    if ns.beta is not None:
        key = "beta_b" if ns.endpoint == "b" else "beta_a"
        upd[key] = parse_list(ns.beta)
    return replace(cfg, **upd)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the exit status."""
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if ns.emit_config:
            print(emit_config(cfg), end="")
            return 0
        status, text = HANDLERS[ns.command](cfg)
    except MaslovCountError as exc:
        reason = getattr(exc, "reason", type(exc).__name__)
        print(f"error: {reason}: {exc}", file=_sys.stderr)
        return exc.exit_code
    print(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
