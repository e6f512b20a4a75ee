import re
from enum import Enum
from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_serializer, model_validator


_WORD_PATTERN = re.compile(r"[sp]+")
_HASH_PATTERN = re.compile(r"\d+(,\d+)*")
_STARRED_PATTERN = re.compile(r"([sp])(\d+)")


class Symbol(str, Enum):
    """Alphabet of associated tuples: singular point or regular preimage of a singular value."""
    S = "s"
    P = "p"

    @property
    def rank(self) -> int:
        """Sort rank used by canonical forms (S < P)."""
        return 0 if self is Symbol.S else 1


class AstTuple(BaseModel):
    """Associated tuple: cyclic word over {s, p} in circle order."""
    model_config = ConfigDict(frozen=True)

    symbols: Tuple[Symbol, ...] = Field(..., min_length=1, description="Symbols in source-circle order")

    @model_validator(mode="before")
    @classmethod
    def _accept_word(cls, data: Any) -> Any:
        if isinstance(data, str):
            if not _WORD_PATTERN.fullmatch(data):
                raise ValueError(f"tuple must match [sp]+, got {data!r}")
            return {"symbols": tuple(data)}
        return data

    @model_validator(mode="after")
    def _check_singular_count(self) -> "AstTuple":
        if self.singular_count % 2:
            raise ValueError(f"a tuple with singular points needs an even number of s, got {self.singular_count}")
        return self

    @model_serializer
    def _serialize(self) -> str:
        return self.word

    @classmethod
    def from_word(cls, word: str) -> "AstTuple":
        return cls.model_validate(word)

    @property
    def word(self) -> str:
        return "".join(symbol.value for symbol in self.symbols)

    @property
    def ranks(self) -> Tuple[int, ...]:
        return tuple(symbol.rank for symbol in self.symbols)

    @property
    def singular_count(self) -> int:
        return sum(1 for symbol in self.symbols if symbol is Symbol.S)

    @property
    def regular_count(self) -> int:
        return len(self.symbols) - self.singular_count

    @property
    def is_regular_type(self) -> bool:
        return self.singular_count == 0

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.word


class HashTuple(BaseModel):
    """Run lengths (x_1,...,x_n) of p's between consecutive s's, an s fixed last."""
    model_config = ConfigDict(frozen=True)

    runs: Tuple[int, ...] = Field(..., min_length=2, description="Non-negative p-run lengths")

    @model_validator(mode="before")
    @classmethod
    def _accept_text(cls, data: Any) -> Any:
        if isinstance(data, str):
            if not _HASH_PATTERN.fullmatch(data):
                raise ValueError(f"hash tuple must match uint(,uint)*, got {data!r}")
            return {"runs": tuple(int(part) for part in data.split(","))}
        if isinstance(data, (list, tuple)):
            return {"runs": tuple(data)}
        return data

    @model_validator(mode="after")
    def _check_runs(self) -> "HashTuple":
        if any(x < 0 for x in self.runs):
            raise ValueError("run lengths must be non-negative")
        if len(self.runs) % 2:
            raise ValueError(f"a hash tuple needs an even number of entries, got {len(self.runs)}")
        return self

    @model_serializer
    def _serialize(self) -> List[int]:
        return list(self.runs)

    @classmethod
    def from_text(cls, text: str) -> "HashTuple":
        return cls.model_validate(text)

    @property
    def n(self) -> int:
        return len(self.runs)

    @property
    def m(self) -> int:
        return sum(self.runs)

    @property
    def text(self) -> str:
        return ",".join(str(x) for x in self.runs)

    def __str__(self) -> str:
        return self.text


class LegalPerm(BaseModel):
    """
    Legal permutation of Z/kZ: a switch composed with an optional reversation.

    Acting on 0-based positions, position j goes to shift + j, or to
    shift + (k - 1 - j) when reversed.
    """
    model_config = ConfigDict(frozen=True)

    modulus: int = Field(..., ge=1)
    shift: int = 0
    reversed: bool = False

    @model_validator(mode="before")
    @classmethod
    def _normalize_shift(cls, data: Any) -> Any:
        if isinstance(data, dict) and "modulus" in data and int(data["modulus"]) >= 1:
            data = dict(data)
            data["shift"] = int(data.get("shift", 0)) % int(data["modulus"])
        return data

    @classmethod
    def identity(cls, k: int) -> "LegalPerm":
        return cls(modulus=k)

    @classmethod
    def all(cls, k: int) -> List["LegalPerm"]:
        """The 2k elements of L_k (fewer distinct actions when k <= 2)."""
        return [cls(modulus=k, shift=a, reversed=r) for r in (False, True) for a in range(k)]

    @property
    def offset(self) -> int:
        return self.shift if not self.reversed else (self.shift - 1) % self.modulus

    @property
    def sign(self) -> int:
        return -1 if self.reversed else 1

    def position(self, j: int) -> int:
        return (self.offset + self.sign * j) % self.modulus


class StarredSymbol(BaseModel):
    model_config = ConfigDict(frozen=True)

    symbol: Symbol
    index: int = Field(..., ge=1)

    @property
    def text(self) -> str:
        return f"{self.symbol.value}{self.index}"


class StarredTuple(BaseModel):
    """Indexed associated tuple: s_i for singular points, p_i for preimages of sigma_i."""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[StarredSymbol, ...] = Field(..., min_length=1)

    @model_validator(mode="before")
    @classmethod
    def _accept_text(cls, data: Any) -> Any:
        if isinstance(data, str):
            entries = []
            for part in data.split(","):
                match = _STARRED_PATTERN.fullmatch(part.strip())
                if not match:
                    raise ValueError(f"starred entry must look like s1 or p2, got {part!r}")
                entries.append({"symbol": match.group(1), "index": int(match.group(2))})
            return {"entries": tuple(entries)}
        return data

    @model_validator(mode="after")
    def _check_indices(self) -> "StarredTuple":
        singular = [e.index for e in self.entries if e.symbol is Symbol.S]
        if singular != list(range(1, len(singular) + 1)):
            raise ValueError("s indices must run 1..n in order")
        if len(singular) % 2:
            raise ValueError(f"a starred tuple needs an even number of s, got {len(singular)}")
        if any(e.index > len(singular) for e in self.entries if e.symbol is Symbol.P):
            raise ValueError("p indices must lie in 1..n")
        return self

    @model_serializer
    def _serialize(self) -> str:
        return self.text

    @property
    def text(self) -> str:
        return ",".join(entry.text for entry in self.entries)

    def forget(self) -> AstTuple:
        """Drop the indices."""
        return AstTuple(symbols=tuple(entry.symbol for entry in self.entries))

    def __str__(self) -> str:
        return self.text


class FeasibilityReport(BaseModel):
    """Outcome of the three feasibility conditions for a run vector."""
    feasible: bool = Field(..., description="n even and all three conditions hold")
    n_even: bool = Field(..., description="Parity flag for the length")
    type_n: int
    type_m: int
    cond_sum_ok: bool = Field(..., description="(1) sum equals the declared m")
    cond_altsum_ok: bool = Field(..., description="(2) alternating sum vanishes mod n")
    cond_crs_ok: bool = Field(..., description="(3) partial sums form a complete remainder system mod n")
    partial_sums: List[int] = Field(..., description="L_k = sum_{i<=k} (-1)^(i+1) (x_i + 1)")


class ExistenceVerdict(BaseModel):
    """Shortcut answer to whether feasible tuples of type (n, m) exist."""
    n: int
    m: int
    exists: Optional[bool] = Field(None, description="False when obstructed, None when enumeration must decide")
    reason: str = Field(..., description="odd-m, mod4-obstruction or unknown-shortcut")


class ClassListing(BaseModel):
    """One canonical representative per class of feasible tuples of type (n, m)."""
    n: int
    m: int
    count: int
    classes: List[HashTuple]


class ClassCount(BaseModel):
    n: int
    m: int
    count: int


class RealizationSpec(BaseModel):
    """Data of the explicit construction for a feasible hash tuple."""
    model_config = ConfigDict(frozen=True)

    hash: HashTuple
    X: Tuple[int, ...] = Field(..., description="X_k = sum_{i<=k} (x_i + 1)")
    Y: Tuple[int, ...] = Field(..., description="Y_k = sum_{i<=k} (-1)^(i+1) (x_i + 1)")

    @property
    def n(self) -> int:
        return self.hash.n

    @property
    def X_full(self) -> Tuple[int, ...]:
        return (0,) + self.X

    @property
    def Y_full(self) -> Tuple[int, ...]:
        return (0,) + self.Y


class SampledCircleMap(BaseModel):
    """Uniform samples of a circle map t -> value, both angles in [0, 2pi)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: np.ndarray
    values: np.ndarray
    lift: np.ndarray = Field(..., description="Unwrapped values")
    winding: int

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.t, self.values)]


class SingularMark(BaseModel):
    t: float = Field(..., description="Curve parameter of the singular point")
    value: float = Field(..., description="Singular value angle in [0, 2pi)")
    maximum: bool = Field(..., description="Local maximum (True) or minimum (False) of the angle profile")


class RegularMark(BaseModel):
    t: float
    value: float
    which_sigma: int = Field(..., ge=1, description="1-based index of the singular mark whose value this hits")


class CircleMarks(BaseModel):
    """Marks extracted from one angle profile."""
    singular_marks: List[SingularMark]
    regular_marks: List[RegularMark]
    winding: int
    ast: AstTuple
    starred: Optional[StarredTuple] = None
    reference_angle: Optional[float] = Field(None, description="Angle used to count preimages in the regular type")


class RealizationReport(BaseModel):
    hash: HashTuple
    X: List[int]
    Y: List[int]
    samples: int
    winding: int
    abs_deg: int
    singular_values: List[float]
    extracted: AstTuple
    verified: bool


class PolyGerm(BaseModel):
    """Pair of bivariate polynomials with rational coefficients vanishing at the origin."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    text1: str
    text2: str
    f1: Any = Field(..., description="sympy Poly in x, y over QQ")
    f2: Any = Field(..., description="sympy Poly in x, y over QQ")

    def __str__(self) -> str:
        return f"({self.f1.as_expr()}, {self.f2.as_expr()})"


class LevelCurve(BaseModel):
    """Closed polyline on |f(p)| = epsilon, counter-clockwise around the origin."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    epsilon: float
    points: np.ndarray = Field(..., description="(M, 2) vertices in the backend's number type")
    arclength: np.ndarray = Field(..., description="Cumulative float64 arclength, length M + 1")
    closed: bool
    start_ray: float

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    def __len__(self) -> int:
        return len(self.points)


class MarkedCircle(BaseModel):
    """A traced level curve with its angle profile and marks."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    curve: LevelCurve
    angle_profile: np.ndarray = Field(..., description="Unwrapped arg f at the vertices")
    singular_marks: List[SingularMark]
    regular_marks: List[RegularMark]
    winding: int
    ast: AstTuple
    starred: Optional[StarredTuple] = None
    reference_angle: Optional[float] = None


class ClassReport(BaseModel):
    """Full invariant package for one equivalence class."""
    ast: AstTuple
    hash: Optional[HashTuple]
    n: int
    m: int
    abs_deg: int
    cusp_parity: Optional[int]
    epsilon_used: float
    stabilized: bool
    seed: int


class GermEquivalence(BaseModel):
    equivalent: bool
    within_hypothesis: bool = Field(..., description="Both germs have singular points outside the origin")
    first: ClassReport
    second: ClassReport


# Request models for the HTTP API

class EquivalenceRequest(BaseModel):
    first: AstTuple
    second: AstTuple


class ApplyRequest(BaseModel):
    tuple: AstTuple
    shift: int = 0
    reversed: bool = False


class RealizationRequest(BaseModel):
    hash: HashTuple
    samples: Optional[int] = Field(None, description="Sample count (defaults to configuration)")


class GermSource(BaseModel):
    f1: str = Field(..., description="First component, polynomial in x, y")
    f2: str = Field(..., description="Second component, polynomial in x, y")


class RecognitionOptions(BaseModel):
    eps0: Optional[float] = Field(None, gt=0, description="First epsilon of the schedule")
    precision: Optional[int] = Field(None, ge=53, description="Working precision in bits")
    seed: Optional[int] = Field(None, description="Seed for reference-angle re-picks")


class GermRequest(GermSource, RecognitionOptions):
    pass


class GermPairRequest(RecognitionOptions):
    first: GermSource
    second: GermSource


class FoldCheckRequest(GermSource):
    x: float
    y: float
