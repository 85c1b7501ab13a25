"""
Configuration Module
Run settings shared by the command-line entry point and the library
"""
from dataclasses import asdict, dataclass

from src.errors import ConfigError

OUTPUT_FORMATS = ("text", "json", "dot")
ORACLE_HARD_CAP = 11


@dataclass
class RunConfig:
    """
    Settings for one workbench run

    Attributes:
        state_bound: Maximum number of states explored per state space
        oracle_bound: Maximum number of states handed to partition enumeration
        output_format: One of text, json, dot
        seed: Seed for the random term generator
        proptest_cases: Number of generated cases per property
        workers: Threads used by the property runner
        depth: Truncation depth for tree diagrams and mass curves
        verbose: Enable debug logging
    """
    state_bound: int = 10_000
    oracle_bound: int = 8
    output_format: str = "text"
    seed: int = 42
    proptest_cases: int = 200
    workers: int = 1
    depth: int = 12
    verbose: bool = False

    def validate(self) -> "RunConfig":
        if self.state_bound < 1:
            raise ConfigError(f"state bound must be positive, got {self.state_bound}")
        if not 1 <= self.oracle_bound <= ORACLE_HARD_CAP:
            raise ConfigError(f"oracle bound must lie in 1..{ORACLE_HARD_CAP}, got {self.oracle_bound}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.proptest_cases < 1:
            raise ConfigError("at least one property case is required")
        if self.workers < 1:
            raise ConfigError("at least one worker is required")
        if self.depth < 0:
            raise ConfigError("depth must be non-negative")
        return self

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Build a validated config from an argparse namespace; missing flags keep defaults"""
        defaults = cls()
        config = cls(
            state_bound=getattr(args, "bound", None) or defaults.state_bound,
            oracle_bound=getattr(args, "oracle_bound", None) or defaults.oracle_bound,
            output_format=getattr(args, "format", None) or defaults.output_format,
            seed=defaults.seed if getattr(args, "seed", None) is None else args.seed,
            proptest_cases=getattr(args, "cases", None) or defaults.proptest_cases,
            workers=getattr(args, "workers", None) or defaults.workers,
            depth=defaults.depth if getattr(args, "depth", None) is None else args.depth,
            verbose=bool(getattr(args, "verbose", False)),
        )
        return config.validate()

    def to_dict(self) -> dict:
        return asdict(self)
