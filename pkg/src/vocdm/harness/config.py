"""Experiment configuration.

Configs are small YAML files; every key has a default so a file only needs
what differs. Keys::

    experiment    ber | papr-ccdf | papr-table | diversity-scan
    id            experiment id, part of every derived seed
    constellation bpsk | qpsk | 4pam
    schemes       list of {M, N, kind}; kind is fresnel (default), fourier or identity
    channel       {L, Q} or {tau_max, f_max, T_s}, plus covariance: iid | [variances]
    snr_db        SNR grid in dB (SNR = 1 / sigma^2); .inf allowed
    gamma_db      PAPR threshold grid in dB
    ccdf_level    CCDF level at which the threshold gamma is reported (papr-ccdf)
    trials        blocks per SNR point / PAPR draws per scheme / data draws per scheme
    batch         trials per task; fixes the work partition independently of workers
    detector      ml | mmse
    budget        candidate budget for exhaustive searches
    samples       sampled error vectors per data draw (diversity-scan)
    constellations, n_values, kinds   grid of the papr-table experiment
    seed, workers, out, format
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..channel import ChannelSpec, GridMapping, grid_from_physical, num_coefficients
from ..detect import DEFAULT_BUDGET
from ..errors import ConfigError
from ..modem import Constellation, Kind, ModulationParams, get_constellation

EXPERIMENTS = ("ber", "papr-ccdf", "papr-table", "diversity-scan")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "ber"
    id: str = ""
    constellation: str = "qpsk"
    schemes: tuple[ModulationParams, ...] = ()
    channel: dict = field(default_factory=lambda: {"L": 1, "Q": 1, "covariance": "iid"})
    snr_db: tuple[float, ...] = (10.0, 12.0, 14.0, 16.0)
    gamma_db: tuple[float, ...] = tuple(float(x) for x in np.arange(4.0, 12.01, 0.25))
    ccdf_level: float = 1e-2
    trials: int = 1000
    batch: int = 500
    detector: str = "ml"
    budget: int = DEFAULT_BUDGET
    samples: int = 1000
    constellations: tuple[str, ...] = ("bpsk", "qpsk", "4pam")
    n_values: tuple[int, ...] = (3, 5, 9, 12)
    kinds: tuple[str, ...] = ("fresnel", "fourier")
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not self.id:
            object.__setattr__(self, "id", self.experiment)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.batch < 1:
            raise ConfigError("batch must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.detector not in ("ml", "mmse"):
            raise ConfigError(f"unknown detector {self.detector!r}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        try:
            get_constellation(self.constellation)
            for name in self.constellations:
                get_constellation(name)
            for k in self.kinds:
                Kind(k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.experiment in ("ber", "papr-ccdf", "diversity-scan"):
            if not self.schemes:
                raise ConfigError(f"{self.experiment} needs at least one scheme")
            ks = {p.K for p in self.schemes}
            if len(ks) != 1:
                raise ConfigError(f"all schemes must share one block size K, got {sorted(ks)}")
        if self.experiment == "ber":
            if not self.snr_db:
                raise ConfigError("SNR grid must not be empty")
            if self.detector == "mmse" and any(math.isinf(s) for s in self.snr_db):
                raise ConfigError("the MMSE detector needs finite SNR points")
        if self.experiment == "papr-ccdf" and not self.gamma_db:
            raise ConfigError("gamma grid must not be empty")
        if not 0 < self.ccdf_level < 1:
            raise ConfigError("ccdf_level must lie in (0, 1)")
        if self.experiment in ("ber", "diversity-scan"):
            self.channel_spec()

    @property
    def K(self) -> int:
        return self.schemes[0].K

    @property
    def constellation_obj(self) -> Constellation:
        return get_constellation(self.constellation)

    def channel_grid(self) -> tuple[int, int]:
        ch = self.channel
        if "tau_max" in ch or "f_max" in ch:
            try:
                return grid_from_physical(
                    GridMapping(float(ch["tau_max"]), float(ch["f_max"]), float(ch["T_s"]), self.K)
                )
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad physical channel description: {exc}") from exc
        return int(ch.get("L", 0)), int(ch.get("Q", 0))

    def channel_spec(self) -> ChannelSpec:
        L, Q = self.channel_grid()
        rho = num_coefficients(L, Q)
        cov = self.channel.get("covariance", "iid")
        if cov == "iid":
            r = None
        elif isinstance(cov, (list, tuple)) and len(cov) == rho:
            r = np.diag(np.asarray(cov, dtype=float))
        else:
            raise ConfigError(f"covariance must be 'iid' or a list of {rho} variances")
        try:
            return ChannelSpec(L, Q, self.K, r)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


def _scheme(item) -> ModulationParams:
    try:
        if isinstance(item, dict):
            return ModulationParams(int(item["M"]), int(item["N"]), Kind(item.get("kind", "fresnel")))
        m, n, *rest = item
        return ModulationParams(int(m), int(n), Kind(rest[0] if rest else "fresnel"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scheme entry {item!r}: {exc}") from exc


def from_mapping(data: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = dict(data)
    if "schemes" in kw:
        kw["schemes"] = tuple(_scheme(s) for s in kw["schemes"])
    for key, conv in (("snr_db", float), ("gamma_db", float), ("n_values", int)):
        if key in kw:
            kw[key] = tuple(conv(v) for v in kw[key])
    for key in ("constellations", "kinds"):
        if key in kw:
            kw[key] = tuple(str(v) for v in kw[key])
    if "channel" in kw and not isinstance(kw["channel"], dict):
        raise ConfigError("channel must be a mapping")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return from_mapping(data)


#: Built-in configurations used when the CLI gets no ``--config``.
DEFAULTS = {
    "ber": {
        "experiment": "ber",
        "id": "ber-k8",
        "constellation": "qpsk",
        "schemes": [{"M": 2, "N": 4}, {"M": 1, "N": 8}, {"M": 8, "N": 1}],
        "channel": {"L": 1, "Q": 1, "covariance": "iid"},
        "snr_db": [10, 12, 14, 16],
        "trials": 2000,
        "seed": 1,
    },
    "papr-ccdf": {
        "experiment": "papr-ccdf",
        "id": "papr-ccdf-k400",
        "constellation": "bpsk",
        "schemes": [
            {"M": 100, "N": 4},
            {"M": 100, "N": 4, "kind": "fourier"},
            {"M": 1, "N": 400},
            {"M": 400, "N": 1},
        ],
        "trials": 100000,
        "batch": 2000,
        "seed": 1,
    },
    "papr-table": {"experiment": "papr-table", "id": "papr-table"},
    "diversity-scan": {
        "experiment": "diversity-scan",
        "id": "diversity-scan",
        "constellation": "qpsk",
        "schemes": [{"M": 12, "N": 1}, {"M": 1, "N": 12}, {"M": 2, "N": 6}, {"M": 4, "N": 3}],
        "channel": {"L": 1, "Q": 1, "covariance": "iid"},
        "trials": 20,
        "samples": 1000,
        "seed": 1,
    },
}


def default_config(experiment: str) -> ExperimentConfig:
    try:
        return from_mapping(DEFAULTS[experiment])
    except KeyError:
        raise ConfigError(f"no built-in configuration for {experiment!r}") from None
