"""Command-line front end.

Every subcommand reads a JSON run configuration, lets flags override it,
and writes CSV curves plus a JSON summary into the output directory.

Exit codes: 0 success, 2 invalid configuration, 3 numeric or
parameter-domain failure, 4 I/O failure.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .channel_models import (
    PdtEstimate,
    SamplerConfig,
    extended_grid,
    fit_lognormal,
    lognormal_mean,
    sample_beam_wandering,
    sample_elliptic,
    standard_grid,
)
from .errors import ConfigError, DomainError, EllipticBeamError
from .quantum_optics import GaussianQuadState, squeezing_curve
from .turbulence_params import COLLIMATED, BeamConfig, ChannelConfig, TurbulenceStats, stats

__all__ = ["RunConfig", "load_config", "main", "write_csv", "read_csv"]

MODELS = ("elliptic", "beam_wandering", "log_normal")
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    beam: BeamConfig
    channel: ChannelConfig
    sampler: SamplerConfig
    models: tuple[str, ...]
    output_dir: Path
    thresholds: tuple[float, ...] | None = None
    input_squeezing_db: float | None = None
    threshold_on: str = "total"
    raw: dict | None = None

    @property
    def config_hash(self) -> str:
        # output location does not affect results
        doc = {k: v for k, v in (self.raw or {}).items() if k != "output_dir"}
        canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _get(section: dict, path: str, key: str, kind=float, required=True, default=None):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = section[key]
    try:
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            value = float(value)
            if not math.isfinite(value):
                raise TypeError
        elif kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            value = int(value)
        elif kind is str and not isinstance(value, str):
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {value!r}") from None
    return value


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name)
    if sec is None:
        raise ConfigError(name, "missing section")
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a JSON object")
    return sec


def _build(field: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except DomainError as exc:
        raise ConfigError(field, str(exc)) from None


def load_config(doc: dict, **overrides) -> RunConfig:
    """Validate a configuration document and apply non-None ``overrides``.

    Recognised overrides: ``seed``, ``n_samples``, ``n_streams``,
    ``n_threads``, ``output_dir``, ``models``, ``regime``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    doc = json.loads(json.dumps(doc))
    b = _section(doc, "beam")
    c = _section(doc, "channel")
    s = doc.setdefault("sampler", {})
    if not isinstance(s, dict):
        raise ConfigError("sampler", "must be a JSON object")

    for key, target, name in (
        ("seed", s, "seed"),
        ("n_samples", s, "n_samples"),
        ("n_streams", s, "n_streams"),
        ("regime", c, "regime"),
        ("output_dir", doc, "output_dir"),
        ("models", doc, "models"),
    ):
        if overrides.get(key) is not None:
            target[name] = overrides[key]

    wavefront = b.get("wavefront_radius_m", COLLIMATED)
    if wavefront != COLLIMATED:
        wavefront = _get(b, "beam", "wavefront_radius_m")
    beam = _build(
        "beam",
        BeamConfig,
        wavelength=_get(b, "beam", "wavelength_m"),
        w0=_get(b, "beam", "w0_m"),
        path_length=_get(b, "beam", "path_length_m"),
        wavefront_radius=wavefront,
    )

    rytov = _get(c, "channel", "rytov_sq", required=False)
    cn2 = _get(c, "channel", "cn2", required=False)
    if (rytov is None) == (cn2 is None):
        raise ConfigError("channel.rytov_sq", "give exactly one of rytov_sq and cn2")
    regime = _get(c, "channel", "regime", kind=str, required=False, default="auto")
    if regime not in ("weak", "strong", "auto"):
        raise ConfigError("channel.regime", f"must be weak, strong or auto, got {regime!r}")
    channel = _build(
        "channel",
        ChannelConfig,
        aperture_radius=_get(c, "channel", "aperture_radius_m"),
        rytov_sq=rytov,
        cn2=cn2,
        det_attenuation_db=_get(c, "channel", "det_attenuation_db", required=False, default=0.0),
        regime=regime,
        auto_threshold=_get(c, "channel", "auto_threshold", required=False, default=10.0),
    )

    sampler = _build(
        "sampler",
        SamplerConfig,
        n_samples=_get(s, "sampler", "n_samples", kind=int, required=False, default=100_000),
        seed=_get(s, "sampler", "seed", kind=int, required=False, default=0),
        n_streams=_get(s, "sampler", "n_streams", kind=int, required=False, default=1),
        n_threads=overrides.get("n_threads") or 1,
    )

    models = doc.get("models", list(MODELS))
    if isinstance(models, str):
        models = [m.strip() for m in models.split(",") if m.strip()]
    if not isinstance(models, list) or not models:
        raise ConfigError("models", "must be a non-empty list")
    for m in models:
        if m not in MODELS:
            raise ConfigError("models", f"unknown model {m!r}; choose from {', '.join(MODELS)}")
    models = tuple(m for m in MODELS if m in models)
    doc["models"] = list(models)

    thresholds = doc.get("thresholds")
    if thresholds is not None:
        if not isinstance(thresholds, list) or not thresholds:
            raise ConfigError("thresholds", "must be a non-empty list of numbers")
        thresholds = tuple(_get({"t": t}, "thresholds", "t") for t in thresholds)
        if any(b < a for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigError("thresholds", "must be sorted ascending")
    squeeze = _get(doc, "<root>", "input_squeezing_db", required=False)
    threshold_on = _get(doc, "<root>", "threshold_on", kind=str, required=False, default="total")
    if threshold_on not in ("total", "pre_attenuation"):
        raise ConfigError("threshold_on", "must be total or pre_attenuation")

    return RunConfig(
        beam=beam,
        channel=channel,
        sampler=sampler,
        models=models,
        output_dir=Path(doc.get("output_dir", ".")),
        thresholds=thresholds,
        input_squeezing_db=squeeze,
        threshold_on=threshold_on,
        raw=doc,
    )


def read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _format_csv(header: list[str], columns: list[np.ndarray]) -> str:
    buf = io.StringIO()
    np.savetxt(
        buf,
        np.column_stack([np.asarray(c, dtype=float) for c in columns]),
        fmt="%.9g",
        delimiter=",",
        header=",".join(header),
        comments="",
        newline="\n",
    )
    return buf.getvalue()


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write columns with a header row, 9 significant digits and LF endings."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(_format_csv(header, columns))


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="ascii", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

@dataclass
class _Run:
    cfg: RunConfig
    stats: TurbulenceStats
    estimates: dict[str, PdtEstimate]


def _simulate(cfg: RunConfig, models=None) -> _Run:
    models = cfg.models if models is None else models
    st = stats(cfg.beam, cfg.channel)
    est: dict[str, PdtEstimate] = {}
    if "elliptic" in models or "log_normal" in models:
        est["elliptic"] = sample_elliptic(st, cfg.beam, cfg.channel, cfg.sampler)
    if "beam_wandering" in models:
        est["beam_wandering"] = sample_beam_wandering(st, cfg.beam, cfg.channel, cfg.sampler)
    if "log_normal" in models:
        est["log_normal"] = fit_lognormal(est["elliptic"])
    return _Run(cfg, st, {m: est[m] for m in models})


def _summary(run: _Run) -> dict:
    cfg = run.cfg
    return {
        "tool_version": __version__,
        "config_hash": cfg.config_hash,
        "seed": cfg.sampler.seed,
        "n_samples": cfg.sampler.n_samples,
        "n_streams": cfg.sampler.n_streams,
        "regime_used": run.stats.regime_used,
        "lognormal_mean_closed_form": lognormal_mean(run.stats, cfg.beam, cfg.channel)
        * cfg.channel.attenuation,
        "models": {
            tag: {
                "mean": e.mean,
                "mean_se": e.mean_se,
                "second_moment": e.second_moment,
                "second_moment_se": e.second_moment_se,
            }
            for tag, e in run.estimates.items()
        },
    }


def _exceedance_grid(tag: str) -> np.ndarray:
    return extended_grid() if tag == "log_normal" else standard_grid()


def _emit_pdt(run: _Run, out: Path) -> list[Path]:
    paths = []
    for tag, e in run.estimates.items():
        p = out / f"pdt_{tag}.csv"
        write_csv(p, ["eta", "density"], [e.grid, e.density])
        paths.append(p)
    return paths


def _emit_exceedance(run: _Run, out: Path) -> list[Path]:
    paths = []
    for tag, e in run.estimates.items():
        grid = _exceedance_grid(tag)
        p = out / f"exceedance_{tag}.csv"
        write_csv(p, ["eta", "exceedance"], [grid, e.exceedance_at(grid)])
        paths.append(p)
    return paths


def _prepare_out(cfg: RunConfig) -> Path:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(run: _Run, out: Path, paths: list[Path], extra: dict | None = None) -> None:
    summary = _summary(run)
    if extra:
        summary.update(extra)
    p = out / "summary.json"
    _write_json(p, summary)
    for path in [*paths, p]:
        click.echo(str(path))


# ---------------------------------------------------------------------------
# click commands
# ---------------------------------------------------------------------------

def _common(f):
    options = [
        click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                     help="JSON run configuration."),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override sampler seed."),
        click.option("--samples", "n_samples", type=click.IntRange(min=1), default=None,
                     help="Override number of Monte Carlo samples."),
        click.option("--streams", "n_streams", type=click.IntRange(min=1), default=None,
                     help="Override number of random substreams."),
        click.option("--threads", "n_threads", type=click.IntRange(min=1), default=None,
                     help="Worker threads (does not change results)."),
        click.option("--out", "output_dir", type=click.Path(file_okay=False), default=None,
                     help="Output directory."),
        click.option("--models", default=None, help="Comma-separated subset of elliptic,beam_wandering,log_normal."),
        click.option("--regime", type=click.Choice(["weak", "strong", "auto"]), default=None,
                     help="Turbulence parameter table."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _run_guarded(action):
    """Translate package errors into exit codes."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            action()
        for w in caught:
            click.echo(f"warning: {w.message}", err=True)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except EllipticBeamError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _load(config_path, **overrides) -> RunConfig:
    return load_config(read_config_file(config_path), **overrides)


@click.group()
@click.version_option(__version__, prog_name="ellipticbeam")
def main():
    """Fading statistics of atmospheric optical channels in the elliptic-beam model."""


@main.command()
@_common
def params(config_path, **overrides):
    """Write the Gaussian beam-parameter statistics as JSON."""

    def action():
        cfg = _load(config_path, **overrides)
        st = stats(cfg.beam, cfg.channel)
        doc = {"tool_version": __version__, "config_hash": cfg.config_hash, **st.as_dict()}
        out = _prepare_out(cfg)
        p = out / "params.json"
        _write_json(p, doc)
        click.echo(json.dumps(doc, indent=2, sort_keys=True))

    _run_guarded(action)


@main.command()
@_common
def sample(config_path, **overrides):
    """Write raw transmittance samples of the sample-based models."""

    def action():
        cfg = _load(config_path, **overrides)
        models = tuple(m for m in cfg.models if m != "log_normal")
        if not models:
            raise ConfigError("models", "sample needs elliptic or beam_wandering")
        run = _simulate(cfg, models)
        out = _prepare_out(cfg)
        paths = []
        for tag, e in run.estimates.items():
            p = out / f"samples_{tag}.csv"
            write_csv(p, ["eta"], [e.samples])
            paths.append(p)
        _finish(run, out, paths)

    _run_guarded(action)


@main.command()
@_common
def pdt(config_path, **overrides):
    """Write density curves (eta, density) for each model."""

    def action():
        cfg = _load(config_path, **overrides)
        run = _simulate(cfg)
        out = _prepare_out(cfg)
        _finish(run, out, _emit_pdt(run, out))

    _run_guarded(action)


@main.command()
@_common
def exceedance(config_path, **overrides):
    """Write exceedance curves (eta, exceedance) for each model."""

    def action():
        cfg = _load(config_path, **overrides)
        run = _simulate(cfg)
        out = _prepare_out(cfg)
        _finish(run, out, _emit_exceedance(run, out))

    _run_guarded(action)


@main.command()
@_common
def compare(config_path, **overrides):
    """Run pdt and exceedance for all three models."""

    def action():
        cfg = replace(_load(config_path, **overrides), models=MODELS)
        run = _simulate(cfg)
        out = _prepare_out(cfg)
        _finish(run, out, _emit_pdt(run, out) + _emit_exceedance(run, out))

    _run_guarded(action)


@main.command()
@_common
def squeezing(config_path, **overrides):
    """Write postselected squeezing curves (eta_min, squeezing_db, acceptance_fraction)."""

    def action():
        cfg = _load(config_path, **overrides)
        if cfg.input_squeezing_db is None:
            raise ConfigError("input_squeezing_db", "missing required field")
        if cfg.thresholds is None:
            raise ConfigError("thresholds", "missing required field")
        run = _simulate(cfg)
        out = _prepare_out(cfg)
        state = GaussianQuadState.squeezed(cfg.input_squeezing_db)
        paths, truncated = [], {}
        for tag, e in run.estimates.items():
            curve = squeezing_curve(state, e, cfg.thresholds, threshold_on=cfg.threshold_on)
            p = out / f"squeezing_{tag}.csv"
            write_csv(
                p,
                ["eta_min", "squeezing_db", "acceptance_fraction", "truncated"],
                [curve.thresholds, curve.squeezing_db, curve.acceptance_fraction, curve.truncated],
            )
            paths.append(p)
            truncated[tag] = curve.is_truncated
            if curve.is_truncated:
                first = float(curve.thresholds[curve.truncated][0])
                click.echo(f"warning: {tag}: no samples at or above eta_min={first:g}; rows flagged", err=True)
        _finish(run, out, paths, {"input_squeezing_db": cfg.input_squeezing_db, "truncated": truncated})

    _run_guarded(action)


if __name__ == "__main__":  # pragma: no cover
    main()
