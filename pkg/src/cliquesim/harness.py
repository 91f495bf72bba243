"""Scenario configuration, run orchestration, and report assembly.

Scenario files are flat ``key = value`` text with one optional
``[sealer N]`` section per sealer that deviates from the honest default.
The three bundled presets (``honest``, ``attack``, ``fixed``) reproduce
the two sealing experiments and the hardened-verifier rerun at desk scale;
they differ from one another only in the verification preset and the one
malicious sealer section.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .engine import FIXED, PRESETS, VerifyFlags
from .simnet import DelayModel, SimResult, Simulation
from .strategies import PolicyKind, SealerPolicy
from .workload import tx_batch_schedule


class ScenarioError(Exception):
    """Base class for scenario loading failures."""


class ParseError(ScenarioError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ScenarioError):
    def __init__(self, message: str, fld: str):
        super().__init__(f"{fld}: {message}")
        self.field = fld


@dataclass
class SealerSpec:
    """Per-sealer policy and optional verification override."""

    policy: SealerPolicy = field(default_factory=SealerPolicy.honest)
    flags: VerifyFlags | None = None  # None -> scenario-wide flags


@dataclass
class ScenarioConfig:
    n_sealers: int
    block_interval_ms: int = 5000
    duration_ms: int = 1_800_000
    tx_rate_per_s: int = 10
    seed: int = 0
    delay_min_ms: int = 5
    delay_max_ms: int = 50
    flags: VerifyFlags = FIXED
    tx_cap: int | None = None
    sealer_specs: dict[int, SealerSpec] = field(default_factory=dict)

    def validate(self) -> None:
        if self.n_sealers < 1:
            raise ValidationError("must be >= 1", "n_sealers")
        if self.block_interval_ms <= 0:
            raise ValidationError("must be > 0", "block_interval_ms")
        if self.duration_ms < 0:
            raise ValidationError("must be >= 0", "duration_ms")
        if self.tx_rate_per_s <= 0:
            raise ValidationError("must be > 0", "tx_rate_per_s")
        if not 0 <= self.delay_min_ms <= self.delay_max_ms:
            raise ValidationError("need 0 <= min <= max", "delay_min_ms")
        if self.tx_cap is not None and self.tx_cap < 0:
            raise ValidationError("must be >= 0", "tx_cap")
        for index, spec in self.sealer_specs.items():
            if not 0 <= index < self.n_sealers:
                raise ValidationError(f"sealer {index} out of range", "sealer")
            forced = spec.policy.forced_difficulty
            if forced is not None and forced < 0:
                raise ValidationError("must be >= 0", f"sealer {index}: forced_difficulty")

    def policies(self) -> list[SealerPolicy]:
        return [
            self.sealer_specs.get(i, SealerSpec()).policy for i in range(self.n_sealers)
        ]

    def flag_list(self) -> list[VerifyFlags]:
        out = []
        for i in range(self.n_sealers):
            spec = self.sealer_specs.get(i)
            out.append(spec.flags if spec and spec.flags is not None else self.flags)
        return out

    def malicious_indices(self) -> list[int]:
        return [
            i
            for i, policy in enumerate(self.policies())
            if policy.kind is PolicyKind.MALICIOUS
        ]

    def to_dict(self) -> dict:
        return {
            "n_sealers": self.n_sealers,
            "block_interval_ms": self.block_interval_ms,
            "duration_ms": self.duration_ms,
            "tx_rate_per_s": self.tx_rate_per_s,
            "seed": self.seed,
            "delay_min_ms": self.delay_min_ms,
            "delay_max_ms": self.delay_max_ms,
            "tx_cap": self.tx_cap,
            "flags": _flags_dict(self.flags),
            "sealers": {
                str(i): {
                    "policy": spec.policy.kind.value,
                    "forced_difficulty": spec.policy.forced_difficulty,
                    "zero_delay": spec.policy.zero_delay,
                    "bypass_recents": spec.policy.bypass_recents,
                    "flags": _flags_dict(spec.flags) if spec.flags else None,
                }
                for i, spec in sorted(self.sealer_specs.items())
            },
        }


def _flags_dict(flags: VerifyFlags) -> dict:
    return {
        "check_recently_signed": flags.check_recently_signed,
        "check_difficulty_domain": flags.check_difficulty_domain,
        "check_inturn_identity": flags.check_inturn_identity,
    }


# -- scenario file parsing ---------------------------------------------------

_GLOBAL_INT_KEYS = {
    "n_sealers",
    "block_interval_ms",
    "duration_ms",
    "tx_rate_per_s",
    "seed",
    "delay_min_ms",
    "delay_max_ms",
    "tx_cap",
}
_CHECK_KEYS = {
    "check_recently_signed",
    "check_difficulty_domain",
    "check_inturn_identity",
}
_SEALER_KEYS = {"policy", "forced_difficulty", "zero_delay", "bypass_recents", "verify"}
_SECTION_RE = re.compile(r"^\[\s*sealer\s+(\d+)\s*\]$")


def _parse_bool(value: str, line: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ParseError(f"expected a boolean, got {value!r}", line)


def _parse_int(value: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"expected an integer, got {value!r}", line) from None


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse scenario text; defaults applied, invariants validated."""
    globals_: dict[str, object] = {}
    global_checks: dict[str, bool] = {}
    sealer_sections: dict[int, dict[str, object]] = {}
    current: dict[str, object] | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        section = _SECTION_RE.match(line)
        if section:
            index = int(section.group(1))
            current = sealer_sections.setdefault(index, {})
            continue
        if line.startswith("["):
            raise ParseError(f"bad section header {line!r}", line_no)
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line_no)
        key, _, value = (part.strip() for part in line.partition("="))
        if current is None:
            if key in _GLOBAL_INT_KEYS:
                globals_[key] = _parse_int(value, line_no)
            elif key == "verify":
                if value not in ("fixed", "vulnerable", "custom"):
                    raise ParseError(f"unknown verify preset {value!r}", line_no)
                globals_["verify"] = value
            elif key in _CHECK_KEYS:
                global_checks[key] = _parse_bool(value, line_no)
            else:
                raise ParseError(f"unknown key {key!r}", line_no)
        else:
            if key == "policy":
                if value not in ("honest", "malicious"):
                    raise ParseError(f"unknown policy {value!r}", line_no)
                current["policy"] = value
            elif key == "forced_difficulty":
                current["forced_difficulty"] = _parse_int(value, line_no)
            elif key in ("zero_delay", "bypass_recents"):
                current[key] = _parse_bool(value, line_no)
            elif key == "verify":
                if value not in ("fixed", "vulnerable"):
                    raise ParseError(f"unknown verify preset {value!r}", line_no)
                current["verify"] = value
            elif key not in _SEALER_KEYS:
                raise ParseError(f"unknown sealer key {key!r}", line_no)

    if "n_sealers" not in globals_:
        raise ValidationError("missing required key", "n_sealers")

    preset = globals_.pop("verify", "fixed")
    base = PRESETS.get(preset, FIXED)  # "custom" starts from fixed
    flags = VerifyFlags(
        check_recently_signed=global_checks.get(
            "check_recently_signed", base.check_recently_signed
        ),
        check_difficulty_domain=global_checks.get(
            "check_difficulty_domain", base.check_difficulty_domain
        ),
        check_inturn_identity=global_checks.get(
            "check_inturn_identity", base.check_inturn_identity
        ),
    )

    specs: dict[int, SealerSpec] = {}
    for index, section in sorted(sealer_sections.items()):
        if section.get("policy", "honest") == "malicious":
            policy = SealerPolicy.malicious(
                forced_difficulty=section.get("forced_difficulty", 2),
                zero_delay=section.get("zero_delay", True),
                bypass_recents=section.get("bypass_recents", True),
            )
        else:
            policy = SealerPolicy.honest()
        sealer_flags = PRESETS[section["verify"]] if "verify" in section else None
        specs[index] = SealerSpec(policy=policy, flags=sealer_flags)

    config = ScenarioConfig(
        n_sealers=globals_.get("n_sealers"),
        block_interval_ms=globals_.get("block_interval_ms", 5000),
        duration_ms=globals_.get("duration_ms", 1_800_000),
        tx_rate_per_s=globals_.get("tx_rate_per_s", 10),
        seed=globals_.get("seed", 0),
        delay_min_ms=globals_.get("delay_min_ms", 5),
        delay_max_ms=globals_.get("delay_max_ms", 50),
        flags=flags,
        tx_cap=globals_.get("tx_cap"),
        sealer_specs=specs,
    )
    config.validate()
    return config


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such scenario file: {path}", 0)
    return parse_scenario(path.read_text())


# -- presets -----------------------------------------------------------------

_PRESET_COMMON = """\
# {title}
n_sealers = 5
block_interval_ms = 5000
duration_ms = 1800000
tx_rate_per_s = 10
seed = 1
delay_min_ms = 5
delay_max_ms = 50
verify = {verify}
"""

_PRESET_ATTACKER = """
[sealer 2]
policy = malicious
forced_difficulty = 2
zero_delay = true
bypass_recents = true
"""


def preset_text(name: str) -> str:
    if name == "honest":
        return _PRESET_COMMON.format(title="all sealers honest, hardened verifier", verify="fixed")
    if name == "attack":
        return (
            _PRESET_COMMON.format(
                title="sealer 2 frontruns, flawed verifier", verify="vulnerable"
            )
            + _PRESET_ATTACKER
        )
    if name == "fixed":
        return (
            _PRESET_COMMON.format(
                title="sealer 2 frontruns, hardened verifier", verify="fixed"
            )
            + _PRESET_ATTACKER
        )
    raise ValidationError(f"unknown preset {name!r}", "preset")


def preset_config(name: str) -> ScenarioConfig:
    return parse_scenario(preset_text(name))


# -- running -----------------------------------------------------------------

def sealer_addresses(seed: int, n_sealers: int) -> tuple[str, ...]:
    """Deterministic pseudo-addresses: 0x-prefixed, 40 hex chars."""
    return tuple(
        "0x" + hashlib.sha256(f"sealer:{seed}:{i}".encode()).hexdigest()[:40]
        for i in range(n_sealers)
    )


@dataclass(frozen=True)
class BlockRow:
    number: int
    sealer_addr: str
    difficulty: int
    time_ms: int
    tx_count: int


@dataclass
class SealerReport:
    index: int
    address: str
    canonical_blocks: int
    canonical_txs: int
    attempts: int
    leader_attempts: int
    rejections: dict[str, int]


@dataclass
class RunReport:
    config: dict
    block_log: list[BlockRow]
    per_sealer: list[SealerReport]
    totals: dict[str, int]
    nodes: list[dict[str, int]]

    def sealer_share(self, index: int) -> float:
        height = self.totals["canonical_height"]
        return self.per_sealer[index].canonical_blocks / height if height else 0.0

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "block_log": [vars(row) for row in self.block_log],
            "per_sealer": [vars(s) for s in self.per_sealer],
            "totals": self.totals,
            "nodes": self.nodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def build_simulation(config: ScenarioConfig) -> Simulation:
    """Construct a ready-to-run simulation: genesis, nodes, tx stream, plans."""
    config.validate()
    sim = Simulation(
        sealers=sealer_addresses(config.seed, config.n_sealers),
        policies=config.policies(),
        flags=config.flag_list(),
        block_interval_ms=config.block_interval_ms,
        delay_model=DelayModel(config.delay_min_ms, config.delay_max_ms),
        seed=config.seed,
        tx_cap=config.tx_cap,
    )
    sim.schedule_tx_batches(
        tx_batch_schedule(config.tx_rate_per_s, config.duration_ms)
    )
    sim.start()
    return sim


def assemble_report(config: ScenarioConfig, result: SimResult) -> RunReport:
    rows = [
        BlockRow(
            number=header.number,
            sealer_addr=header.sealer_addr,
            difficulty=header.difficulty,
            time_ms=header.sim_time_ms,
            tx_count=len(header.tx_ids),
        )
        for header in result.canonical
    ]
    blocks = [0] * config.n_sealers
    txs = [0] * config.n_sealers
    for header in result.canonical[1:]:
        blocks[header.sealer_index] += 1
        txs[header.sealer_index] += len(header.tx_ids)
    per_sealer = [
        SealerReport(
            index=i,
            address=result.sealers[i],
            canonical_blocks=blocks[i],
            canonical_txs=txs[i],
            attempts=result.tallies[i].attempts,
            leader_attempts=result.tallies[i].leader_attempts,
            rejections=dict(sorted(result.tallies[i].rejections.items())),
        )
        for i in range(config.n_sealers)
    ]
    totals = {
        "canonical_height": result.canonical[-1].number,
        "canonical_txs": sum(txs),
        "txs_generated": result.txs_generated,
    }
    return RunReport(
        config=config.to_dict(),
        block_log=rows,
        per_sealer=per_sealer,
        totals=totals,
        nodes=result.node_counters,
    )


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Run one scenario end to end and report on the agreed canonical chain."""
    sim = build_simulation(config)
    result = sim.run_until(config.duration_ms)
    return assemble_report(config, result)


def run_sweep(config: ScenarioConfig, seeds: list[int]) -> tuple[list[RunReport], dict]:
    """Rerun ``config`` across ``seeds`` and aggregate the attacker's share.

    With no malicious sealer configured, the largest per-sealer share of
    each run is aggregated instead.
    """
    import dataclasses

    reports = []
    shares = []
    malicious = config.malicious_indices()
    for seed in seeds:
        seeded = dataclasses.replace(config, seed=seed)
        report = run_scenario(seeded)
        if malicious:
            share = report.sealer_share(malicious[0])
        else:
            share = max(report.sealer_share(i) for i in range(config.n_sealers))
        reports.append(report)
        shares.append(share)
    summary = {
        "seeds": list(seeds),
        "mean_share": sum(shares) / len(shares) if shares else 0.0,
        "min_share": min(shares) if shares else 0.0,
        "max_share": max(shares) if shares else 0.0,
    }
    return reports, summary


# -- block log export ----------------------------------------------------------

CSV_HEADER = "number,addr,difficulty,time_ms,tx_count"


def export_block_log(report: RunReport, path: str | Path, fmt: str = "plain") -> None:
    """Write the canonical block log.

    Plain mode is one ASCII line per block, ``<number> <addr> <diff>``,
    ascending by number and nothing else; CSV mode adds the header
    ``number,addr,difficulty,time_ms,tx_count`` plus the timing columns.
    """
    if fmt not in ("plain", "csv"):
        raise ValueError(f"unknown log format {fmt!r}")
    lines = []
    if fmt == "csv":
        lines.append(CSV_HEADER)
        for row in report.block_log:
            lines.append(
                f"{row.number},{row.sealer_addr},{row.difficulty},{row.time_ms},{row.tx_count}"
            )
    else:
        for row in report.block_log:
            lines.append(f"{row.number} {row.sealer_addr} {row.difficulty}")
    text = "\n".join(lines) + ("\n" if lines else "")
    Path(path).write_text(text, encoding="ascii")
