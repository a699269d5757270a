"""
Resolved configuration of one CLI run.
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, field_validator

from app.config import Settings
from app.models.params import SchemeParams
from app.utils.errors import InvalidParams


# key-value config file names -> RunConfig fields
_FILE_KEYS = {
    "case": "case",
    "n": "N",
    "p": "P",
    "b": "B",
    "r": "r",
    "r_prime": "r_prime",
    "q": "q",
    "seed": "seed",
    "rounds": "rounds",
    "users": "users",
    "output": "output_path",
    "output_path": "output_path",
    "pr": "Pr",
    "base": "base",
}


def parse_int_list(value: Union[str, int, List[int]]) -> List[int]:
    """'1,2,3' -> [1, 2, 3]."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, list):
        return [int(v) for v in value]
    try:
        return [int(part) for part in str(value).split(",") if part.strip()]
    except ValueError:
        raise InvalidParams(f"expected a comma-separated list of integers (got {value!r})") from None


class RunConfig(BaseModel):
    """Flags merged over a key-value config file merged over Settings defaults."""

    command: str = Field(..., description="init | simulate | leakage | costs")
    case: Optional[int] = Field(default=None, description="Scheme case 1..4")
    N: Optional[int] = Field(default=None, description="Number of databases")
    P: Optional[int] = Field(default=None, description="Number of subpackets")
    B: List[int] = Field(default_factory=lambda: [1], description="Segment count(s)")
    r: Optional[float] = Field(default=None, description="Uplink sparsification rate")
    r_prime: Optional[float] = Field(default=None, description="Downlink sparsification rate")
    q: int = Field(default=2147483647, description="Field modulus")
    seed: int = Field(default=0, ge=0, description="Master seed")
    rounds: int = Field(default=1, ge=1)
    users: int = Field(default=1, ge=1)
    Pr: Optional[int] = Field(default=None, description="Sparse-set size for leakage")
    base: float = Field(default=2.0, gt=1, description="Entropy logarithm base")
    oracle: bool = Field(default=False, description="Cross-check leakage by enumeration")
    output_path: Optional[Path] = Field(default=None, description="Output file")

    @field_validator("B", mode="before")
    @classmethod
    def split_segments(cls, v: Any) -> List[int]:
        return parse_int_list(v)

    @classmethod
    def resolve(
        cls,
        command: str,
        flags: Mapping[str, Any],
        settings: Settings,
        config_file: Optional[Union[str, Path]] = None,
    ) -> "RunConfig":
        """
        Merge flags > config file > settings.

        Flags whose value is None are treated as unset.
        """
        merged: Dict[str, Any] = {"q": settings.field_modulus, "seed": settings.default_seed}
        if config_file is not None:
            path = Path(config_file)
            if not path.is_file():
                raise InvalidParams(f"config file {path} does not exist")
            for key, value in dotenv_values(path).items():
                field = _FILE_KEYS.get(key.lower())
                if field is None:
                    raise InvalidParams(f"unknown config key {key!r} in {path}")
                if value is not None:
                    merged[field] = value
        merged.update({k: v for k, v in flags.items() if v is not None})
        merged["command"] = command
        return cls(**merged)

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise InvalidParams(f"{self.command} needs {', '.join(missing)}")

    def scheme_params(self, num_segments: Optional[int] = None) -> SchemeParams:
        """SchemeParams for one segment count (the first by default)."""
        self.require("case", "N", "P", "r", "r_prime")
        return SchemeParams(
            case=self.case,
            num_databases=self.N,
            num_subpackets=self.P,
            num_segments=self.B[0] if num_segments is None else num_segments,
            r=self.r,
            r_prime=self.r_prime,
            q=self.q,
        )

    def provenance(self) -> Dict[str, Any]:
        """Resolved values, echoed into output headers."""
        values = self.model_dump(exclude_none=True)
        values["B"] = ",".join(str(b) for b in self.B)
        if "output_path" in values:
            values["output_path"] = str(values["output_path"])
        return values
