"""Command-line front end.

Configs are INI files::

    [model]
    a = 1
    theta = 1
    sigma = 1.4142135623730951

    [nu]
    kind = finite_activity   # zero | point_masses | finite_activity | tempered_stable
    rate = 1
    law = exponential
    mean = 1

    [run]
    command = lowerbound
    seed = 7

    [lowerbound]
    t = 1
    x = 1

Every command reads its options from the section of the same name. Output is
CSV with '#' provenance lines that embed the canonical config, so
:func:`config_from_csv` recovers an equivalent :class:`RunConfig`.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import re
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rngmod
from .errors import JcirError, NumericalError, ValidationError

COMMANDS = ("check", "cf", "simulate", "skeleton", "density", "lowerbound", "ergodicity")


class ConfigError(ValidationError):
    pass


# ---------------------------------------------------------------------------
# value parsers


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(s):
    return int(s)


def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _float_list(s):
    items = [x for x in re.split(r"[,\s]+", s.strip()) if x]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(x) for x in items)


def _complex_list(s):
    items = [x for x in re.split(r"[,\s]+", s.strip()) if x]
    if not items:
        raise ValueError("empty list")
    return tuple(complex(x.replace("i", "j")) for x in items)


def _choice(*names):
    def parse(s):
        v = s.strip().lower()
        if v not in names:
            raise ValueError(f"expected one of {', '.join(names)}")
        return v

    return parse


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _all(pred):
    return lambda v: all(pred(x) for x in v)


# key -> (parser, default or REQUIRED, predicate, description of the predicate)
REQUIRED = object()
_MODEL = {
    "a": (_float, REQUIRED, _pos, "a > 0"),
    "theta": (_float, REQUIRED, _nonneg, "theta >= 0"),
    "sigma": (_float, REQUIRED, _pos, "sigma > 0"),
}
_NU_KIND = _choice("zero", "point_masses", "finite_activity", "tempered_stable")
_NU = {
    "zero": {},
    "point_masses": {
        "sizes": (_float_list, REQUIRED, _all(_pos), "sizes > 0"),
        "weights": (_float_list, REQUIRED, _all(_pos), "weights > 0"),
    },
    "finite_activity": {
        "rate": (_float, REQUIRED, _pos, "rate > 0"),
        "law": (_choice("exponential", "gamma"), REQUIRED, None, ""),
        "mean": (_float, None, _pos, "mean > 0"),
        "shape": (_float, None, _pos, "shape > 0"),
        "scale": (_float, None, _pos, "scale > 0"),
    },
    "tempered_stable": {
        "c": (_float, REQUIRED, _pos, "c > 0"),
        "alpha": (_float, REQUIRED, lambda v: 0 <= v < 1, "0 <= alpha < 1"),
        "lam": (_float, REQUIRED, _pos, "lam > 0"),
        "eps_trunc": (_float, 1e-8, _pos, "eps_trunc > 0"),
    },
}
_RUN = {
    "command": (_choice(*COMMANDS), REQUIRED, None, ""),
    "seed": (_int, 0, _nonneg, "seed >= 0"),
    "threads": (_int, 1, _pos, "threads >= 1"),
    "output": (str, "", None, ""),
}
_DENSITY = {
    "t": (_float, REQUIRED, _pos, "t > 0"),
    "x": (_float, REQUIRED, _nonneg, "x >= 0"),
    "n_points": (_int, 400, lambda v: v >= 2, "n_points >= 2"),
    "span_l": (_float, 12.0, _pos, "span_l > 0"),
    "n_terms": (_int, 4096, lambda v: v >= 16, "n_terms >= 16"),
    "tol_mass": (_float, 1e-6, _pos, "tol_mass > 0"),
    "split_atom": (_bool, True, None, ""),
}
_COMMAND_KEYS = {
    "check": {},
    "cf": {
        "t": (_float, REQUIRED, _nonneg, "t >= 0"),
        "x": (_float, REQUIRED, _nonneg, "x >= 0"),
        "u": (_complex_list, REQUIRED, _all(lambda z: z.real <= 0), "Re(u) <= 0"),
        "oracle": (_bool, True, None, ""),
    },
    "simulate": {
        "scheme": (_choice("euler", "exact"), "euler", None, ""),
        "x0": (_float, REQUIRED, _nonneg, "x0 >= 0"),
        "horizon": (_float, REQUIRED, _pos, "horizon > 0"),
        "dt": (_float, 0.01, _pos, "dt > 0"),
        "n_paths": (_int, 1, _pos, "n_paths >= 1"),
    },
    "skeleton": {
        "x": (_float, REQUIRED, _nonneg, "x >= 0"),
        "delta": (_float, REQUIRED, _pos, "delta > 0"),
        "n_steps": (_int, REQUIRED, _pos, "n_steps >= 1"),
        "n_chains": (_int, 1, _pos, "n_chains >= 1"),
    },
    "density": _DENSITY,
    "lowerbound": {**_DENSITY, "tol": (_float, 1e-6, _pos, "tol > 0")},
    "ergodicity": {
        "x_list": (_float_list, (0.0, 10.0), _all(_nonneg), "x >= 0"),
        "delta": (_float, 0.25, _pos, "delta > 0"),
        "n_max": (_int, 48, lambda v: v >= 3, "n_max >= 3"),
        "n_mc": (_int, 100000, lambda v: v >= 100, "n_mc >= 100"),
        "tv_start": (_float, 0.06, lambda v: 0 < v <= 1, "0 < tv_start <= 1"),
        "floor_factor": (_float, 3.0, _pos, "floor_factor > 0"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description. ``model``, ``nu`` and ``options`` hold parsed values."""

    model: dict
    nu: dict
    command: str
    options: dict
    seed: int = 0
    threads: int = 1
    output_path: str = field(default="", compare=False)
    extra_sections: dict = field(default_factory=dict)

    def params(self):
        from .model import JcirParams

        return JcirParams(self.model["a"], self.model["theta"], self.model["sigma"], build_nu(self.nu))

    def to_text(self) -> str:
        """Canonical INI text; parsing it gives back an equal config.

        The output path is left out: it names a destination, not the run.
        """
        lines = ["[model]"]
        lines += [f"{k} = {_fmt(self.model[k])}" for k in _MODEL]
        lines += ["", "[nu]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.nu.items()]
        lines += ["", "[run]", f"command = {self.command}", f"seed = {self.seed}", f"threads = {self.threads}"]
        lines += ["", f"[{self.command}]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.options.items()]
        for name, opts in self.extra_sections.items():
            lines += ["", f"[{name}]"] + [f"{k} = {_fmt(v)}" for k, v in opts.items()]
        return "\n".join(lines) + "\n"


def build_nu(spec: dict):
    from .model import (
        ExponentialJumps,
        FiniteActivity,
        GammaJumps,
        InfiniteActivity,
        PointMasses,
        TemperedStableDensity,
        ZeroMeasure,
    )

    kind = spec["kind"]
    if kind == "zero":
        return ZeroMeasure()
    if kind == "point_masses":
        return PointMasses(sizes=spec["sizes"], weights=spec["weights"])
    if kind == "finite_activity":
        law = ExponentialJumps(spec["mean"]) if spec["law"] == "exponential" else GammaJumps(spec["shape"], spec["scale"])
        return FiniteActivity(spec["rate"], law)
    dens = TemperedStableDensity(spec["c"], spec["alpha"], spec["lam"])
    return InfiniteActivity(dens, eps_trunc=spec["eps_trunc"])


def _key_lines(text):
    # (section, key) -> line number, for error context
    where = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]$", line)
        if m:
            section = m.group(1).strip().lower()
            where[(section, None)] = i
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), i)
    return where


def _read_section(cp, name, schema, where, required_section=True):
    ctx = lambda key: f"line {where.get((name, key), where.get((name, None), '?'))}, [{name}] {key}"
    if not cp.has_section(name):
        if required_section and any(spec[1] is REQUIRED for spec in schema.values()):
            raise ConfigError(f"missing section [{name}]")
        items = {}
    else:
        items = dict(cp.items(name))
    out = {}
    for key in items:
        if key not in schema:
            raise ConfigError(f"{ctx(key)}: unknown key")
    for key, (parse, default, pred, desc) in schema.items():
        if key in items:
            try:
                val = parse(items[key])
            except ValueError as exc:
                raise ConfigError(f"{ctx(key)} = {items[key]!r}: {exc}") from None
            if pred is not None and not pred(val):
                raise ConfigError(f"{ctx(key)} = {items[key]!r}: violates {desc}")
            out[key] = val
        elif default is REQUIRED:
            raise ConfigError(f"[{name}]: missing required key '{key}'")
        elif default is not None:
            out[key] = default
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate INI text; the first problem raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}".replace("\n", " ")) from None
    where = _key_lines(text)
    known = {"model", "nu", "run", *COMMANDS}
    for name in cp.sections():
        if name not in known:
            raise ConfigError(f"line {where.get((name, None), '?')}: unknown section [{name}]")
    model = _read_section(cp, "model", _MODEL, where)
    run = _read_section(cp, "run", _RUN, where)

    if not cp.has_section("nu"):
        nu = {"kind": "zero"}
    else:
        raw = dict(cp.items("nu"))
        if "kind" not in raw:
            raise ConfigError("[nu]: missing required key 'kind'")
        try:
            kind = _NU_KIND(raw["kind"])
        except ValueError as exc:
            raise ConfigError(f"line {where.get(('nu', 'kind'), '?')}, [nu] kind: {exc}") from None
        schema = {"kind": (_NU_KIND, REQUIRED, None, ""), **_NU[kind]}
        for key in raw:
            if key not in schema:
                raise ConfigError(
                    f"line {where.get(('nu', key), '?')}, [nu] {key}: not a field of nu kind '{kind}'"
                )
        nu = _read_section(cp, "nu", schema, where)
        _check_nu_variant(nu)

    command = run["command"]
    options = _read_section(cp, command, _COMMAND_KEYS[command], where)
    extra = {}
    for name in COMMANDS:
        if name != command and cp.has_section(name):
            extra[name] = _read_section(cp, name, _COMMAND_KEYS[name], where, required_section=False)
    cfg = RunConfig(model, nu, command, options, run["seed"], run["threads"], run["output"], extra)
    _check_preconditions(cfg)
    return cfg


def _check_nu_variant(nu):
    kind = nu["kind"]
    if kind == "point_masses" and len(nu["sizes"]) != len(nu["weights"]):
        raise ConfigError("[nu]: sizes and weights must have the same length")
    if kind == "finite_activity":
        need = ("mean",) if nu["law"] == "exponential" else ("shape", "scale")
        other = ("shape", "scale") if nu["law"] == "exponential" else ("mean",)
        for key in need:
            if key not in nu:
                raise ConfigError(f"[nu]: law '{nu['law']}' needs key '{key}'")
        for key in other:
            if key in nu:
                raise ConfigError(f"[nu]: key '{key}' is inconsistent with law '{nu['law']}'")


def _check_preconditions(cfg: RunConfig):
    # builds the model (validating a, theta, sigma, nu) and cross-field rules
    p = cfg.params()
    o = cfg.options
    if cfg.command == "simulate" and o["scheme"] == "euler" and o["dt"] > o["horizon"]:
        raise ConfigError("[simulate]: dt must satisfy dt <= horizon")
    if cfg.command in ("density", "lowerbound") and not p.theta > 0:
        raise ConfigError(f"[{cfg.command}]: density inversion needs theta > 0")
    if cfg.command == "ergodicity":
        from .model import check_admissible

        if not check_admissible(p.nu).theorem_ok:
            raise ConfigError("[nu]: ergodicity needs int_0^1 xi ln(1/xi) nu < inf and int_1^inf xi nu < inf")


def config_from_csv(text: str) -> RunConfig:
    """Recover the config embedded in a CSV written by :func:`run`."""
    lines = text.splitlines()
    try:
        start = lines.index("# config:") + 1
    except ValueError:
        raise ConfigError("no embedded config found") from None
    body = []
    for line in lines[start:]:
        if not line.startswith("#"):
            break
        body.append(line[2:] if line.startswith("# ") else line[1:])
    return parse_config("\n".join(body))


# ---------------------------------------------------------------------------
# commands


def _rng(cfg, tag):
    return rngmod.stream(cfg.seed, tag)


def _cmd_check(cfg, p):
    from .model import check_admissible

    r = check_admissible(p.nu)
    header = ["int_xi_wedge_1", "int_tail_xi", "int_xi_log", "int_xi", "lemma32_ok", "lemma41_ok", "theorem_ok"]
    return header, [[r.int_xi_wedge_1, r.int_tail_xi, r.int_xi_log, r.int_xi, r.lemma32_ok, r.lemma41_ok, r.theorem_ok]]


def _cmd_cf(cfg, p):
    from .charfn import jcir_cf, riccati_oracle

    o = cfg.options
    header = ["u_re", "u_im", "t", "x", "cf_re", "cf_im", "phi_re", "phi_im", "psi_re", "psi_im"]
    if o["oracle"]:
        header += ["oracle_re", "oracle_im", "rel_err"]
    rows = []
    for u in o["u"]:
        v = jcir_cf(o["t"], o["x"], u, p)
        row = [u.real, u.imag, o["t"], o["x"], v.value.real, v.value.imag, v.phi.real, v.phi.imag, v.psi.real, v.psi.imag]
        if o["oracle"]:
            ph, ps = riccati_oracle(o["t"], u, p)
            ref = complex(np.exp(ph + o["x"] * ps))
            row += [ref.real, ref.imag, abs(v.value - ref) / max(abs(ref), 1e-300)]
        rows.append(row)
    return header, rows


def _cmd_simulate(cfg, p):
    from .simulate import PathConfig, euler_path, exact_marginal_sample

    o = cfg.options
    if o["scheme"] == "exact":
        gen = _rng(cfg, "simulate")
        draws = exact_marginal_sample(o["horizon"], o["x0"], p, gen, size=(o["n_paths"],))
        return ["path", "t", "state"], [[i, o["horizon"], v] for i, v in enumerate(draws)]
    pc = PathConfig(o["x0"], o["horizon"], o["dt"], cfg.seed, o["n_paths"])
    res = euler_path(pc, p, threads=cfg.threads)
    rows = [[i, k, res.times[k], res.states[i, k]] for i in range(res.states.shape[0]) for k in range(res.times.size)]
    return ["path", "step", "t", "state"], rows


def _cmd_skeleton(cfg, p):
    from .simulate import skeleton_chain

    o = cfg.options
    ch = skeleton_chain(o["x"], o["delta"], o["n_steps"], p, _rng(cfg, "skeleton"), n_chains=o["n_chains"])
    st = ch.states.reshape(o["n_chains"], -1)
    rows = [[c, n, n * o["delta"], st[c, n]] for c in range(st.shape[0]) for n in range(st.shape[1])]
    return ["chain", "n", "t", "state"], rows


def _inv_cfg(o):
    from .inversion import InversionConfig

    return InversionConfig(o["span_l"], o["n_terms"], o["tol_mass"], o["split_atom"])


def _cmd_density(cfg, p, tol=None):
    from .inversion import default_grid, lower_bound_check

    o = cfg.options
    ic = _inv_cfg(o)
    grid = default_grid(o["t"], o["x"], p, o["n_points"], ic)
    rep = lower_bound_check(o["t"], o["x"], grid, p, tol=1e-6 if tol is None else tol, inv_cfg=ic)
    rows = [[y, pv, f, rep.c_t, m] for y, pv, f, m in zip(rep.y_grid, rep.p_values, rep.f_values, rep.margin)]
    notes = [f"min_margin={_fmt(rep.min_margin)}", f"violations={rep.violations}"]
    return ["y", "p", "f", "c_t", "margin"], rows, notes


def _cmd_lowerbound(cfg, p):
    return _cmd_density(cfg, p, cfg.options["tol"])


def _cmd_ergodicity(cfg, p):
    from .ergodicity import FitConfig, ergodic_rate_fit

    o = cfg.options
    fc = FitConfig(floor_factor=o["floor_factor"], tv_start=o["tv_start"])
    reps = ergodic_rate_fit(list(o["x_list"]), o["delta"], o["n_max"], p, o["n_mc"], _rng(cfg, "ergodicity"), fc)
    header = ["row", "x", "n", "t", "tv_hat", "tv_se", "beta_hat", "beta_se", "fit_r2", "lyapunov_ok", "m_hat"]
    rows = []
    for r in reps:
        for n, tv, se in r.tv_series:
            rows.append(["tv", r.x, int(n), n * r.delta, tv, se, "", "", "", "", ""])
    for r in reps:
        rows.append(["summary", r.x, "", "", "", "", r.beta_hat, r.beta_se, r.fit_r2, r.lyapunov_ok, r.m_hat])
    return header, rows


_DISPATCH = {
    "check": _cmd_check,
    "cf": _cmd_cf,
    "simulate": _cmd_simulate,
    "skeleton": _cmd_skeleton,
    "density": _cmd_density,
    "lowerbound": _cmd_lowerbound,
    "ergodicity": _cmd_ergodicity,
}


def render_csv(cfg: RunConfig, header, rows, notes=()) -> str:
    buf = io.StringIO()
    buf.write(f"# jcir {cfg.command} seed={cfg.seed}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    buf.write("# config:\n")
    for line in cfg.to_text().splitlines():
        buf.write(f"# {line}\n" if line else "#\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(float(v)) if isinstance(v, np.floating) else _fmt(v) for v in row) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig) -> str:
    """Execute ``cfg`` and return the CSV text."""
    p = cfg.params()
    out = _DISPATCH[cfg.command](cfg, p)
    header, rows = out[0], out[1]
    notes = out[2] if len(out) > 2 else ()
    return render_csv(cfg, header, rows, notes)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    ap = _Parser(prog="jcir", description="Jump-diffusion CIR toolkit")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="overrides [run] command")
    ap.add_argument("--config", required=True, help="INI config path")
    ap.add_argument("--output", help="CSV path (default: [run] output, else stdout)")
    ap.add_argument("--seed", type=int, help="overrides [run] seed")
    ap.add_argument("--threads", type=int, help="overrides [run] threads")
    args = ap.parse_args(argv)
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if args.command:
            text = _override_command(text, args.command)
        cfg = parse_config(text)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            cfg = replace(cfg, seed=args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg = replace(cfg, threads=args.threads)
        if args.output:
            cfg = replace(cfg, output_path=args.output)
        csv = run(cfg)
    except ValidationError as exc:
        print(f"jcir: invalid input: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, JcirError, ArithmeticError) as exc:
        print(f"jcir: numerical failure: {exc}", file=sys.stderr)
        return 2
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    return 0


def _override_command(text, command):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}".replace("\n", " ")) from None
    if not cp.has_section("run"):
        cp.add_section("run")
    cp.set("run", "command", command)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


if __name__ == "__main__":
    raise SystemExit(main())
