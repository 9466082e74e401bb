"""Command-line entry point.

Each command writes one CSV (to ``--out`` or stdout).  Parameters come from
built-in defaults, then the command's section of an INI ``--config`` file,
then command-line flags (``--t-end 2`` sets ``t_end``).

Exit status: 0 success, 2 configuration error, 3 resource cap exceeded,
4 numerical-domain error.
"""
from __future__ import annotations

import argparse
import configparser
import inspect
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import reports
from .advantage import parse_scenarios
from .block_encoding import (
    SparseMatrixDesc,
    read_sparse_triples,
    write_sparse_triples,
)
from .csvio import write_csv
from .errors import (
    CarlemanLabError,
    ConfigError,
    DegenerateOutputError,
    DomainError,
    InstabilityError,
    ResourceError,
)

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_DOMAIN = 4


def _defaults(fn: Callable, skip=()) -> dict:
    return {
        name: p.default
        for name, p in inspect.signature(fn).parameters.items()
        if name not in skip and p.default is not inspect.Parameter.empty
    }


_BLOCK_ENCODE = {
    **_defaults(reports.step_target, skip=("matrix", "seed")),
    "steps": 10,
    "q_a": 1,
    "matrix_in": "",
    "matrix_out": "",
    "pauli_out": "",
}

COMMANDS: dict[str, dict] = {
    "fig1": _defaults(reports.fig1),
    "fig2": _defaults(reports.fig2),
    "fig3": _defaults(reports.fig3),
    "fig4": _defaults(reports.fig4),
    "fig6": {**_defaults(reports.fig6, skip=("scenarios",)), "scenarios": ""},
    "lbm-error": _defaults(reports.lbm_error),
    "block-encode": _BLOCK_ENCODE,
    "advantage-report": {**_defaults(reports.advantage_report, skip=("scenarios",)), "scenarios": ""},
    "multiscale": _defaults(reports.multiscale),
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(
                f"unknown command {self.command!r}; valid commands: {', '.join(COMMANDS)}"
            )
        valid = COMMANDS[self.command]
        unknown = sorted(set(self.params) - set(valid))
        if unknown:
            raise ConfigError(
                f"unknown keys {unknown} for {self.command}; valid keys: {sorted(valid)}"
            )
        merged = dict(valid)
        for key, value in self.params.items():
            merged[key] = coerce(key, value, valid[key])
        self.params = merged


def coerce(key: str, value, default):
    """Convert a raw (string) value to the type of ``default``."""
    if not isinstance(value, str):
        return value
    try:
        if isinstance(default, bool):
            return value.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, (tuple, list)):
            return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {key}") from None
    return value


def read_config(path: str, command: str) -> dict:
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not parser.has_section(command):
        return {}
    return {k.replace("-", "_"): v for k, v in parser.items(command)}


def _load_scenarios(path: str):
    if not path:
        return None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenarios {path}: {exc}") from None
    return parse_scenarios(text)


def _write_aux(path: str, header, rows, cfg: RunConfig) -> None:
    with open(path, "w", newline="") as fh:
        write_csv(fh, header, rows, cfg.command, cfg.params, cfg.seed)


def execute(cfg: RunConfig, out) -> None:
    """Run ``cfg`` and write its primary CSV to the text stream ``out``."""
    p = dict(cfg.params)
    cmd = cfg.command
    if cmd == "fig1":
        table = reports.fig1(**p)
    elif cmd == "fig2":
        table = reports.fig2(**p)
    elif cmd == "fig3":
        table = reports.fig3(**p)
    elif cmd == "fig4":
        table = reports.fig4(**p)
    elif cmd == "fig6":
        table = reports.fig6(scenarios=_load_scenarios(p.pop("scenarios")), **p)
    elif cmd == "advantage-report":
        table = reports.advantage_report(scenarios=_load_scenarios(p.pop("scenarios")), **p)
    elif cmd == "lbm-error":
        table = reports.lbm_error(**p)
    elif cmd == "multiscale":
        table = reports.multiscale(**p)
    elif cmd == "block-encode":
        matrix = None
        if p["matrix_in"]:
            try:
                with open(p["matrix_in"]) as fh:
                    matrix = read_sparse_triples(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read matrix {p['matrix_in']}: {exc}") from None
        target_kw = {k: p[k] for k in _defaults(reports.step_target, skip=("matrix", "seed"))}
        A, v0 = reports.step_target(matrix=matrix, seed=cfg.seed, **target_kw)
        step_table, pauli_table, _ = reports.block_encode(A, v0, p["steps"], p["q_a"])
        if p["matrix_out"]:
            with open(p["matrix_out"], "w") as fh:
                write_sparse_triples(SparseMatrixDesc.from_matrix(A), fh)
        if p["pauli_out"]:
            _write_aux(p["pauli_out"], *pauli_table, cfg)
        table = step_table
    else:  # pragma: no cover - guarded by RunConfig
        raise ConfigError(f"unknown command {cmd!r}")
    write_csv(out, table[0], table[1], cmd, cfg.params, cfg.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carleman-lab",
        description="Reproduce Carleman lattice-Boltzmann figure data and reports as CSV.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, defaults in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--seed", type=int, default=0)
        for key, default in defaults.items():
            shown = ",".join(map(str, default)) if isinstance(default, tuple) else default
            sp.add_argument(
                "--" + key.replace("_", "-"),
                dest=key,
                default=argparse.SUPPRESS,
                metavar="VALUE",
                help=f"default: {shown!r}",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))  # exits with status 2 on bad usage
    command = args.pop("command")
    config_path = args.pop("config")
    out_path = args.pop("out")
    seed = args.pop("seed")
    try:
        params = read_config(config_path, command) if config_path else {}
        params.update(args)
        cfg = RunConfig(command, params, out_path, seed)
        buf = io.StringIO()
        execute(cfg, buf)
        if out_path:
            with open(out_path, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, InstabilityError, DegenerateOutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CarlemanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
