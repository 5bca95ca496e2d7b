"""Command line runner for the canned experiments.

Subcommands
-----------
``run <config>``       execute the experiment named in a YAML config
``validate <config>``  parse, default and range-check a config
``mesh export``        write an icosphere mesh file
``field export``       sample a closed-form map onto a mesh and write it

Exit codes: 0 success, 1 a checked bound failed, 2 configuration error.
The output directory is ``output.directory`` from the config, overridden
by the ``SIGMALAB_OUTPUT_DIR`` environment variable, overridden in turn by
``--output-dir``.
"""
from __future__ import annotations

import argparse
import copy
import csv
import difflib
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__, experiments, kernels
from .errors import EpsilonTooLarge, ExperimentFailure, SigmaLabError
from .family import shrinking_map
from .field import BasingData, hedgehog_field, power_profile, target_from_w, write_field
from .flow import FlowConfig
from .geometry import SpherePoint, build_icosphere, write_mesh
from .ratmaps import RationalMap, rational_field

OUTPUT_ENV = "SIGMALAB_OUTPUT_DIR"
EXPERIMENTS = ("sweep", "collapse", "based-lump", "sector-check", "energy-oracle")
FORMATS = ("csv", "json")

CSV_HELP = """\
artifact columns (stable across versions):
  sweep.csv          eps, E_oracle, E_lattice, degree, bound
  *_trace.csv        iteration, E, degreeRaw, lumpWidth, maxDensity, coreRadius
  dichotomy.csv      case, seed, outcome, iterations, initialE, finalE,
                     finalDegreeRaw, EAtDetection, widthMonotone
  sectors.csv        field_a, field_b, same, expected
  oracle.csv         eps, E, bound
every run also writes manifest.json (config echo, versions, wall time)"""


class ConfigError(Exception):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


# ---------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class Opt:
    kind: str  # int, float, str, complex, floats, complexes, strs, radius
    default: object = None
    lo: float | None = None
    hi: float | None = None
    choices: tuple | None = None
    lo_open: bool = False
    hi_open: bool = False


SCHEMA = {
    "experiment": Opt("str", None, choices=EXPERIMENTS),
    "seed": Opt("int", 0, lo=0),
    "mesh": {
        "subdivisions": Opt("int", None, lo=0, hi=7),
        "refineRadius": Opt("radius", None, lo=0.0, hi=math.pi, lo_open=True),
    },
    "family": {
        "epsilons": Opt("floats", None, lo=0.0, hi=0.5, lo_open=True, hi_open=True),
        "cutoff": Opt("str", "smoothstep", choices=tuple(experiments.CUTOFFS)),
    },
    "flow": {
        "maxIter": Opt("int", 20000, lo=1),
        "gTol": Opt("float", 1e-4, lo=0.0, lo_open=True),
        "collapseThreshold": Opt("float", 3.0, lo=0.0, lo_open=True),
        "logEvery": Opt("int", 10, lo=1),
        "perturbation": Opt("float", None, lo=0.0, hi=1.0),
        "runs": Opt("int", None, lo=1, hi=100),
    },
    "basing": {
        "markedPoints": Opt("complexes", None),
        "qValues": Opt("complexes", None),
    },
    "output": {
        "directory": Opt("str", "results"),
        "formats": Opt("strs", ["csv", "json"], choices=FORMATS),
    },
}

# defaults that depend on the experiment
PER_EXPERIMENT = {
    "sweep": {"mesh.subdivisions": 3, "family.epsilons": [0.05, 0.1, 0.2]},
    "collapse": {"mesh.subdivisions": 4, "family.epsilons": [experiments.COLLAPSE_EPS],
                 "basing.qValues": [0, 0], "flow.perturbation": 0.0, "flow.runs": 1},
    "based-lump": {"mesh.subdivisions": 4, "basing.qValues": [0, "inf"],
                   "flow.perturbation": 0.3, "flow.runs": 1},
    "sector-check": {"mesh.subdivisions": 3, "family.epsilons": [0.1, 0.2]},
    "energy-oracle": {"family.epsilons": [0.05, 0.1, 0.2]},
}
COMMON_DEFAULTS = {"mesh.subdivisions": 4, "family.epsilons": [0.05, 0.1, 0.2],
                   "basing.markedPoints": [1, -1], "basing.qValues": [0, 0],
                   "flow.perturbation": 0.0, "flow.runs": 1}


def parse_complex(v) -> complex:
    """Numbers, ``inf`` and strings such as ``1+2j`` as extended-complex values."""
    if isinstance(v, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(v, (int, float)):
        w = complex(v)
    elif isinstance(v, str):
        s = v.strip().lower().replace(" ", "")
        if s in ("inf", "infinity", "+inf"):
            return complex(math.inf, 0.0)
        w = complex(s.replace("i", "j"))
    else:
        raise ValueError(f"cannot read {v!r} as a complex number")
    if w != w:
        raise ValueError(f"{v!r} is not a number")
    return w


def _check_range(opt: Opt, x: float, path: str) -> None:
    if opt.lo is not None and (x < opt.lo or (opt.lo_open and x == opt.lo)):
        raise ValueError(f"{path} = {x} below the valid range")
    if opt.hi is not None and (x > opt.hi or (opt.hi_open and x == opt.hi)):
        raise ValueError(f"{path} = {x} above the valid range")


def _coerce(opt: Opt, value, path: str):
    if value is None and opt.kind == "radius":
        return None
    k = opt.kind
    if k == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"{path} must be an integer, got {value!r}")
        _check_range(opt, value, path)
        return value
    if k == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"{path} must be a number, got {value!r}")
        _check_range(opt, float(value), path)
        return float(value)
    if k == "str":
        if not isinstance(value, str):
            raise ValueError(f"{path} must be a string, got {value!r}")
        if opt.choices and value not in opt.choices:
            hint = difflib.get_close_matches(value, opt.choices, n=1)
            extra = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ValueError(f"{path} = {value!r} is not one of {', '.join(opt.choices)}{extra}")
        return value
    if k == "radius":
        items = value if isinstance(value, list) else [value]
        out = [_coerce(Opt("float", lo=opt.lo, hi=opt.hi, lo_open=True), r, path) for r in items]
        return out if isinstance(value, list) else out[0]
    if not isinstance(value, list) or not value:
        raise ValueError(f"{path} must be a non-empty list")
    if k == "floats":
        out = [_coerce(Opt("float"), x, path) for x in value]
        for x in out:
            try:
                _check_range(opt, x, path)
            except ValueError:
                if path == "family.epsilons":
                    raise ValueError(f"{path}: eps = {x} outside (0, 1/2) ({EpsilonTooLarge.__name__})") from None
                raise
        return out
    if k == "strs":
        return [_coerce(Opt("str", choices=opt.choices), x, path) for x in value]
    if k == "complexes":
        try:
            return [parse_complex(x) for x in value]
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
    raise AssertionError(k)


# ---------------------------------------------------------------------------
# loading


def _plain(node, path=(), lines=None):
    """Python value of a YAML node, recording the line of every key path."""
    lines = {} if lines is None else lines
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for knode, vnode in node.value:
            key = knode.value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", knode.start_mark.line + 1)
            lines[path + (key,)] = knode.start_mark.line + 1
            out[key] = _plain(vnode, path + (key,), lines)[0]
        return out, lines
    if isinstance(node, yaml.SequenceNode):
        return [_plain(v, path, lines)[0] for v in node.value], lines
    return yaml.safe_load(yaml.serialize(node)), lines


def _set_path(d: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
        if not isinstance(d, dict):
            raise ConfigError(f"override {dotted}: {k} is not a section")
    d[keys[-1]] = value


def _get_path(d: dict, dotted: str):
    for k in dotted.split("."):
        if not isinstance(d, dict) or k not in d:
            return None
        d = d[k]
    return d


def normalize(raw: dict, lines: dict | None = None, source: str = "<config>") -> dict:
    """Defaulted and range-checked config; raises :class:`ConfigError`."""
    lines = lines or {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", 1, source)

    def line_of(path):
        while path and path not in lines:
            path = path[:-1]
        return lines.get(path)

    def walk(schema: dict, data: dict, prefix: tuple) -> dict:
        out = {}
        for key in data:
            if key not in schema:
                hint = difflib.get_close_matches(key, list(schema), n=1)
                extra = f"; did you mean {hint[0]!r}?" if hint else ""
                where = ".".join(prefix + (key,))
                raise ConfigError(f"unknown key {where!r}{extra}", line_of(prefix + (key,)), source)
        for key, opt in schema.items():
            path = prefix + (key,)
            if isinstance(opt, dict):
                sub = data.get(key) or {}
                if not isinstance(sub, dict):
                    raise ConfigError(f"{'.'.join(path)} must be a section", line_of(path), source)
                out[key] = walk(opt, sub, path)
                continue
            if key in data and not (data[key] is None and opt.kind != "radius"):
                try:
                    out[key] = _coerce(opt, data[key], ".".join(path))
                except ValueError as exc:
                    raise ConfigError(str(exc), line_of(path), source) from None
            else:
                out[key] = copy.deepcopy(opt.default)
        return out

    if "experiment" not in raw:
        raise ConfigError("missing required key 'experiment'", 1, source)
    cfg = walk(SCHEMA, raw, ())
    exp = cfg["experiment"]
    for dotted, value in {**COMMON_DEFAULTS, **PER_EXPERIMENT[exp]}.items():
        if _get_path(cfg, dotted) is None:
            v = [parse_complex(x) for x in value] if dotted.startswith("basing.") else copy.deepcopy(value)
            _set_path(cfg, dotted, v)
    _cross_check(cfg, line_of, source)
    return cfg


def _cross_check(cfg: dict, line_of, source: str) -> None:
    exp = cfg["experiment"]
    b = cfg["basing"]
    pts, qs = b["markedPoints"], b["qValues"]
    if len(pts) != len(qs):
        raise ConfigError("basing.markedPoints and basing.qValues differ in length", line_of(("basing",)), source)
    if exp in ("sweep", "collapse", "sector-check", "based-lump"):
        if len(pts) != 2:
            raise ConfigError(f"{exp} needs exactly two marked points", line_of(("basing", "markedPoints")), source)
    if exp in ("sweep", "collapse", "sector-check") and sorted(p.real for p in pts) != [-1.0, 1.0]:
        raise ConfigError(f"{exp} uses the family with marked points 1 and -1",
                          line_of(("basing", "markedPoints")), source)
    if exp in ("sweep", "sector-check") and any(q != 0 for q in qs):
        raise ConfigError(f"{exp} uses basing values (0, 0)", line_of(("basing", "qValues")), source)
    if exp == "collapse" and _chordal(qs[0], qs[1]) != 0.0:
        raise ConfigError("collapse needs coincident basing values", line_of(("basing", "qValues")), source)
    if exp == "based-lump" and _chordal(qs[0], qs[1]) == 0.0:
        raise ConfigError("based-lump needs distinct basing values", line_of(("basing", "qValues")), source)
    if exp == "based-lump" and _chordal(pts[0], pts[1]) == 0.0:
        raise ConfigError("marked points must be distinct", line_of(("basing", "markedPoints")), source)
    if exp == "sweep" and len(cfg["family"]["epsilons"]) < 3:
        raise ConfigError("sweep needs at least three epsilons", line_of(("family", "epsilons")), source)


def _chordal(a: complex, b: complex) -> float:
    return float(np.linalg.norm(target_from_w(a) - target_from_w(b)))


def load_config(path, overrides=()) -> dict:
    """Read, apply ``key.path=value`` overrides and normalize a config file."""
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, source) from None
    try:
        node = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line, source) from None
    if node is None:
        raise ConfigError("empty config", 1, source)
    raw, lines = _plain(node)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", None, "--set")
        key, val = item.split("=", 1)
        if not isinstance(raw, dict):
            break
        _set_path(raw, key.strip(), yaml.safe_load(val))
    return normalize(raw, lines, source)


def config_echo(cfg: dict) -> dict:
    """JSON/YAML friendly copy (complex values become strings)."""

    def enc(v):
        if isinstance(v, complex):
            return _fmt_complex(v)
        if isinstance(v, dict):
            return {k: enc(x) for k, x in v.items()}
        if isinstance(v, list):
            return [enc(x) for x in v]
        return v

    return enc(cfg)


def _fmt_complex(w: complex):
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        return "inf"
    if w.imag == 0:
        return w.real
    return f"{w.real!r}{w.imag:+}j"


# ---------------------------------------------------------------------------
# artifacts


class Artifacts:
    def __init__(self, directory: Path, formats):
        self.dir = Path(directory)
        self.formats = set(formats)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def csv(self, name: str, header, rows) -> None:
        if "csv" not in self.formats:
            return
        with open(self.dir / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        self.written.append(name)

    def json(self, name: str, data) -> None:
        if "json" not in self.formats:
            return
        self.write_json(name, data)

    def write_json(self, name: str, data) -> None:
        with open(self.dir / name, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.written.append(name)

    def text(self, name: str, body: str) -> None:
        (self.dir / name).write_text(body)
        self.written.append(name)


PLOT_SCRIPT = '''"""Plot E(eps) - pi against eps^2 from sweep.csv (needs matplotlib)."""
import csv
import math

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("sweep.csv")))
e2 = [float(r["eps"]) ** 2 for r in rows]
plt.plot(e2, [float(r["E_oracle"]) - math.pi for r in rows], "o-", label="quadrature")
plt.plot(e2, [float(r["E_lattice"]) - math.pi for r in rows], "s--", label="lattice")
plt.plot(e2, [float(r["bound"]) - math.pi for r in rows], ":", label="c eps^2")
plt.xlabel("eps^2")
plt.ylabel("E - pi")
plt.legend()
plt.savefig("sweep.png", dpi=150)
'''


def _flow_config(cfg: dict) -> FlowConfig:
    f = cfg["flow"]
    return FlowConfig(max_iter=f["maxIter"], g_tol=f["gTol"], collapse_threshold=f["collapseThreshold"],
                      log_every=f["logEvery"])


def _mesh(cfg: dict):
    pts = [SpherePoint(target_from_w(p)) for p in cfg["basing"]["markedPoints"]]
    r = cfg["mesh"]["refineRadius"]
    refine = None
    if r is not None:
        south = SpherePoint.from_stereo(0.0)
        refine = [(south, x) for x in (r if isinstance(r, list) else [r])]
    return build_icosphere(cfg["mesh"]["subdivisions"], pts, refine)


def _trace_rows(trace):
    for s in trace.steps:
        yield [s.iteration, s.E, s.degree_raw, s.lump_width, s.max_density, s.core_radius]


TRACE_HEADER = ["iteration", "E", "degreeRaw", "lumpWidth", "maxDensity", "coreRadius"]


def _run_sweep(cfg, out: Artifacts) -> list[str]:
    fam = cfg["family"]
    res, fit = experiments.sweep(fam["epsilons"], cfg["mesh"]["subdivisions"], fam["cutoff"])
    out.csv("sweep.csv", ["eps", "E_oracle", "E_lattice", "degree", "bound"],
            ([e, E, L, d, b] for e, E, L, d, b in res.rows()))
    ratio = None
    eps = res.epsilons
    if 0.1 in eps and 0.2 in eps:
        ratio = (res.energies[eps.index(0.2)] - math.pi) / (res.energies[eps.index(0.1)] - math.pi)
    out.json("sweep.json", {**res.summary(), "fit": fit, "ratio_0.2_0.1": ratio,
                            "nVertices": res.n_vertices})
    if "csv" in out.formats:
        out.text("plot_sweep.py", PLOT_SCRIPT)
    failures = []
    if ratio is not None and not 3.8 <= ratio <= 4.2:
        failures.append(f"(E(0.2)-pi)/(E(0.1)-pi) = {ratio:.4f} outside [3.8, 4.2]")
    if fit["relativeResidual"] >= 0.05:
        failures.append(f"quadratic fit relative residual {fit['relativeResidual']:.4f} >= 0.05")
    if abs(fit["intercept"] - math.pi) > 1e-3:
        failures.append(f"fit intercept {fit['intercept']:.6f} not within 1e-3 of pi")
    return failures


def _run_descents(cfg, out: Artifacts, name: str) -> list[str]:
    mesh = _mesh(cfg)
    q = cfg["basing"]["qValues"]
    fcfg = _flow_config(cfg)
    runs, amp = cfg["flow"]["runs"], cfg["flow"]["perturbation"]
    if name == "collapse":
        base = experiments.coincident_field(cfg["family"]["epsilons"][0], mesh, q[0],
                                            experiments.CUTOFFS[cfg["family"]["cutoff"]]())
    else:
        base = experiments.distinct_field(mesh, q[0], q[1])
    results = []
    for i in range(runs):
        seed = cfg["seed"] + i
        res = experiments.run_descent(experiments.perturbed(base, seed, amp), fcfg, name, seed)
        results.append(res)
        suffix = "" if runs == 1 else f"_{seed}"
        out.csv(f"{name.replace('-', '_')}_trace{suffix}.csv", TRACE_HEADER, _trace_rows(res.trace))
    rows = [r.row() for r in results]
    out.csv("dichotomy.csv", list(rows[0]), ([r[k] for k in rows[0]] for r in rows))
    failures = []
    for r in results:
        if name == "collapse":
            bad = experiments.collapse_check(r, require_monotone=amp == 0.0)
        else:
            bad = experiments.converge_check(r)
        failures += [f"seed {r.seed}: {b}" for b in bad]
    summary = dict(rows[0]) if runs == 1 else {"runs": rows}
    summary["nVertices"] = mesh.n_vertices
    out.json(f"{name.replace('-', '_')}.json", summary)
    return failures


def _run_sectors(cfg, out: Artifacts) -> list[str]:
    mesh = _mesh(cfg)
    rep = experiments.sector_survey(mesh, tuple(cfg["family"]["epsilons"]), cfg["seed"])
    for name, label in rep.labels.items():
        print(f"{name}: {label}")
    out.csv("sectors.csv", ["field_a", "field_b", "same", "expected"], rep.pairs)
    out.json("sectors.json", {"labels": rep.labels,
                              "pairs": [{"a": a, "b": b, "same": s, "expected": e} for a, b, s, e in rep.pairs]})
    return [f"sameSector({a}, {b}) = {s}, expected {e}" for a, b, s, e in rep.failures]


def _run_oracle(cfg, out: Artifacts) -> list[str]:
    fam = cfg["family"]
    tab = experiments.oracle_table(tuple(fam["epsilons"]), fam["cutoff"])
    out.csv("oracle.csv", ["eps", "E", "bound"], ([r["eps"], r["E"], r["bound"]] for r in tab["family"]))
    out.json("oracle.json", tab)
    failures = []
    if abs(tab["identity"] - math.pi) > 1e-9:
        failures.append(f"identity energy {tab['identity']!r} not within 1e-9 of pi")
    if abs(tab["cConstantDouble"] - 0.75 * math.pi) > 1e-9:
        failures.append(f"constant cut-off gives {tab['cConstantDouble']!r}, expected 3 pi / 4")
    for r in tab["family"]:
        if fam["cutoff"] == "smoothstep" and not math.pi < r["E"] <= r["bound"]:
            failures.append(f"eps={r['eps']}: E={r['E']!r} outside (pi, {r['bound']!r}]")
    return failures


RUNNERS = {
    "sweep": _run_sweep,
    "collapse": lambda cfg, out: _run_descents(cfg, out, "collapse"),
    "based-lump": lambda cfg, out: _run_descents(cfg, out, "based-lump"),
    "sector-check": _run_sectors,
    "energy-oracle": _run_oracle,
}


def _versions() -> dict:
    import scipy

    return {
        "sigmalab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pyyaml": yaml.__version__,
        "kernels": kernels.BACKEND,
    }


def output_directory(cfg: dict, flag: str | None = None) -> Path:
    return Path(flag or os.environ.get(OUTPUT_ENV) or cfg["output"]["directory"])


def run_experiment(cfg: dict, directory, argv=None) -> int:
    """Run a normalized config, write artifacts and a manifest; return the exit code."""
    out = Artifacts(Path(directory), cfg["output"]["formats"])
    t0 = time.perf_counter()
    try:
        failures = RUNNERS[cfg["experiment"]](cfg, out)
    except ExperimentFailure as exc:
        failures = [str(exc)]
    wall = time.perf_counter() - t0
    out.write_json("manifest.json", {
        "config": config_echo(cfg),
        "argv": list(argv or []),
        "versions": _versions(),
        "wallTimeSeconds": wall,
        "artifacts": sorted(out.written),
        "status": "fail" if failures else "ok",
    })
    for f in failures:
        print(f"FAILED: {f}", file=sys.stderr)
    print(f"{cfg['experiment']}: {'FAIL' if failures else 'ok'} ({wall:.1f} s) -> {out.dir}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_mesh_args(p):
    p.add_argument("--subdivisions", type=int, default=4)
    p.add_argument("--refine-radius", type=float, action="append", default=None,
                   help="refine around z=0 (repeat for nested balls)")
    p.add_argument("--marked", type=parse_complex, action="append", default=None,
                   help="marked point as a complex number (repeatable; default 1 and -1)")
    p.add_argument("--no-marked", action="store_true", help="build the mesh without marked points")


def _export_mesh(args):
    marked = [] if args.no_marked else (args.marked or [1.0, -1.0])
    pts = [SpherePoint(target_from_w(p)) for p in marked]
    refine = None
    if args.refine_radius:
        south = SpherePoint.from_stereo(0.0)
        refine = [(south, r) for r in args.refine_radius]
    return build_icosphere(args.subdivisions, pts, refine)


def _field_for(args, mesh):
    qs = args.q or []
    if len(qs) != mesh.k:
        raise ConfigError(f"{mesh.k} marked points need {mesh.k} --q values, got {len(qs)}", None, "field export")
    basing = BasingData.for_mesh(mesh, qs) if mesh.k else None
    if args.map == "power":
        rmap = RationalMap([0] * args.degree + [1], [1])
        return rational_field(rmap, mesh, basing)
    if args.map == "shrinking":
        sm = shrinking_map(args.eps)
        return hedgehog_field(mesh, sm.profile, sm.m, basing)
    if args.map == "based-mobius":
        if mesh.k != 2:
            raise ConfigError("based-mobius needs two marked points", None, "field export")
        return experiments.distinct_field(mesh, qs[0], qs[1])
    return hedgehog_field(mesh, power_profile(1), 1, basing)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sigmalab", description=__doc__.splitlines()[0],
                                epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config", epilog=CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("config")
    r.add_argument("--output-dir", default=None, help=f"overrides output.directory and ${OUTPUT_ENV}")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. flow.maxIter=500")
    r.add_argument("--seed", type=int, default=None)

    v = sub.add_parser("validate", help="check a config and print the normalized form")
    v.add_argument("config")
    v.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    v.add_argument("--echo", action="store_true", help="print the normalized config")

    m = sub.add_parser("mesh", help="mesh utilities")
    msub = m.add_subparsers(dest="action", required=True)
    me = msub.add_parser("export", help="write an icosphere mesh file")
    _add_mesh_args(me)
    me.add_argument("-o", "--output", required=True)

    f = sub.add_parser("field", help="field utilities")
    fsub = f.add_subparsers(dest="action", required=True)
    fe = fsub.add_parser("export", help="sample a closed-form map and write field and mesh files")
    _add_mesh_args(fe)
    fe.add_argument("--map", choices=("identity", "power", "shrinking", "based-mobius"), default="identity")
    fe.add_argument("--degree", type=int, default=1, help="exponent for --map power")
    fe.add_argument("--eps", type=float, default=0.2, help="family parameter for --map shrinking")
    fe.add_argument("--q", type=parse_complex, action="append", default=None,
                    help="basing value per marked point (repeatable)")
    fe.add_argument("-o", "--output", required=True)
    fe.add_argument("--mesh-output", default=None)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = list(args.set) + ([f"seed={args.seed}"] if args.seed is not None else [])
            cfg = load_config(args.config, overrides)
            return run_experiment(cfg, output_directory(cfg, args.output_dir), argv)
        if args.command == "validate":
            cfg = load_config(args.config, args.set)
            if args.echo:
                print(yaml.safe_dump(config_echo(cfg), sort_keys=False), end="")
            else:
                print(f"{args.config}: ok ({cfg['experiment']})")
            return 0
        if args.command == "mesh":
            mesh = _export_mesh(args)
            write_mesh(mesh, args.output)
            print(f"mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles -> {args.output}")
            return 0
        if args.command == "field":
            mesh = _export_mesh(args)
            mesh_out = args.mesh_output or str(Path(args.output).with_suffix("")) + "_mesh.txt"
            fld = _field_for(args, mesh)
            write_mesh(mesh, mesh_out)
            write_field(fld, args.output, Path(mesh_out).name)
            print(f"field -> {args.output}, mesh -> {mesh_out}")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SigmaLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
