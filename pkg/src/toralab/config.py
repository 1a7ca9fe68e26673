"""Run configuration: one flat TOML file, strictly validated.

Every section and key is checked against the schema below; unknown keys
are rejected so a typo cannot silently fall back to a default.  Messages
name the violated precondition in the same terms the modules use.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .goodset import GoodSetParams, GoodSetParamError, log_squared_gap

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Configuration failed validation; the CLI maps this to exit code 2."""


_NUM = (int, float)

_SCHEMA: dict[str, dict[str, tuple]] = {
    "aspect": {"p": (int,), "q": (int,)},
    "run": {"seed": (int,), "out": (str,)},
    "spectrum": {"cutoff": _NUM},
    "goodset": {"cutoff": _NUM, "delta": _NUM, "epsilon": _NUM, "margin": _NUM,
                "theta": _NUM, "gap_scale": _NUM},
    "solver": {"cutoff": _NUM, "hard_cap": (int,)},
    "potential": {"kind": (str,), "coeffs": (list,), "bump_radius": _NUM,
                  "bump_amplitude": _NUM, "n": (int,), "r0": _NUM, "r1": _NUM,
                  "alpha": _NUM, "big_l": (int,), "positions_file": (str,)},
    "observables": {"monomials": (list,), "smooth_k": _NUM, "smooth_radius": _NUM},
    "window": {"e_min": _NUM, "e_max": _NUM},
    "rates": {"theta": _NUM, "epsilon": _NUM},
    "disorder": {"sweep": (list,), "wd_constant": _NUM, "r_grid": (list,)},
    "locbound": {"alpha": _NUM, "energy": _NUM, "rho": _NUM, "v_norm": _NUM,
                 "theta": _NUM, "epsilon": _NUM},
}

_POTENTIAL_KINDS = ("zero", "trig", "scatterer", "rdm", "strong_disorder")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with the raw section maps and the file hash."""

    path: str
    raw: dict[str, Any]
    config_hash: str
    seed: int
    out_dir: str | None

    def section(self, name: str) -> dict[str, Any]:
        sec = self.raw.get(name)
        if sec is None:
            raise ConfigError(f"missing [{name}] section required by this command")
        return sec

    def has(self, name: str) -> bool:
        return name in self.raw

    @property
    def aspect_pq(self) -> tuple[int, int]:
        sec = self.section("aspect")
        return int(sec.get("p", 1)), int(sec.get("q", 1))

    def goodset_params(self, validate: bool = True) -> GoodSetParams:
        sec = self.raw.get("goodset", {})
        scale = float(sec.get("gap_scale", 1.0))
        if scale == 1.0:
            gap = log_squared_gap
        else:
            def gap(n: float, _s=scale) -> float:
                return _s * log_squared_gap(n)
        params = GoodSetParams(
            delta=float(sec.get("delta", 0.17)),
            epsilon=float(sec.get("epsilon", 0.01)),
            margin=float(sec.get("margin", 0.5)),
            theta=float(sec.get("theta", 517 / 1648)),
            gap_fn=gap,
        )
        if validate:
            try:
                params.validate()
            except GoodSetParamError as exc:
                raise ConfigError(str(exc)) from exc
        return params


def _validate_tables(raw: dict[str, Any]) -> list[str]:
    errors = []
    for section, content in raw.items():
        allowed = _SCHEMA.get(section)
        if allowed is None:
            errors.append(f"unknown section [{section}]")
            continue
        if not isinstance(content, dict):
            errors.append(f"[{section}] must be a table of keys, not {type(content).__name__}")
            continue
        for key, value in content.items():
            types = allowed.get(key)
            if types is None:
                errors.append(f"unknown key {key!r} in [{section}]")
            elif not isinstance(value, types) or isinstance(value, bool):
                names = "/".join(t.__name__ for t in types)
                errors.append(f"[{section}].{key} must be {names}, got {type(value).__name__}")
    return errors


def _validate_semantics(raw: dict[str, Any]) -> list[str]:
    errors = []
    aspect = raw.get("aspect", {})
    p, q = int(aspect.get("p", 1)), int(aspect.get("q", 1))
    if p < 1 or q < 1:
        errors.append(f"aspect ratio needs positive integers, got p={p}, q={q}")
    elif math.gcd(p, q) != 1:
        errors.append(f"aspect ratio p/q must be in lowest terms, got p={p}, q={q}")
    pot = raw.get("potential")
    if pot is not None:
        kind = pot.get("kind", "zero")
        if kind not in _POTENTIAL_KINDS:
            errors.append(f"potential kind {kind!r} not one of {_POTENTIAL_KINDS}")
        if kind == "trig":
            for row in pot.get("coeffs", []):
                if (not isinstance(row, list) or len(row) != 4
                        or not all(isinstance(x, _NUM) for x in row)):
                    errors.append(f"trig coefficient rows are [m, n, re, im], got {row!r}")
                    break
        if kind in ("scatterer", "rdm", "strong_disorder") and "positions_file" not in pot:
            n = pot.get("n", 0)
            m = math.isqrt(int(n)) if isinstance(n, int) and n > 0 else 0
            if m * m != n:
                errors.append(f"scatterer count n must be a positive perfect square, got {n}")
            r0 = float(pot.get("r0", 0.0))
            if not (0 <= r0 < 0.5):
                errors.append(f"grid distortion r0 must lie in [0, 1/2) lattice spacings, got {r0}")
        if kind == "strong_disorder" and int(pot.get("big_l", 1)) < 1:
            errors.append(f"rescaling big_l must be a positive integer, got {pot.get('big_l')}")
    obs = raw.get("observables", {})
    for row in obs.get("monomials", []):
        if (not isinstance(row, list) or len(row) != 2
                or not all(isinstance(x, int) for x in row) or row == [0, 0]):
            errors.append(f"monomials are nonzero integer pairs [m, n], got {row!r}")
            break
    win = raw.get("window")
    if win is not None:
        lo, hi = float(win.get("e_min", 1.0)), float(win.get("e_max", 2.0))
        if not (0 < lo < hi):
            errors.append(f"energy window needs 0 < e_min < e_max, got [{lo}, {hi}]")
    return errors


def load_config(path: str, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    """Parse, validate, and hash the configuration file."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(blob.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    errors = _validate_tables(raw) + _validate_semantics(raw)
    if errors:
        raise ConfigError("; ".join(errors))
    run_sec = raw.get("run", {})
    seed = seed_override if seed_override is not None else int(run_sec.get("seed", 0))
    out = out_override if out_override is not None else run_sec.get("out")
    digest = hashlib.sha256(blob + f"|seed={seed}".encode()).hexdigest()[:16]
    return RunConfig(path=path, raw=raw, config_hash=digest, seed=seed, out_dir=out)
