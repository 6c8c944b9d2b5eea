from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator
from sympy import isprime

from .config import SCHEMA_TAG

# A word is a list of (generator, exponent) pairs; generators are numbered from 1.
Word = List[Tuple[int, int]]


class PcGroup(BaseModel):
    """Finite l-group given by a power-commutator presentation.

    `powers[i-1]` is the word equal to g_i^l and `commutators` holds triples (j, i, w) with
    j > i meaning [g_j, g_i] = g_j^-1 g_i^-1 g_j g_i = w. Missing commutators are trivial.
    """

    prime: int
    gens: int = Field(ge=0)
    powers: List[Word] = Field(default_factory=list)
    commutators: List[Tuple[int, int, Word]] = Field(default_factory=list)
    names: Optional[List[str]] = None

    @field_validator("prime")
    @classmethod
    def _odd_prime(cls, value: int) -> int:
        if value == 2 or not isprime(value):
            raise ValueError(f"pc-presentations need an odd prime, got {value}")
        return value

    @model_validator(mode="after")
    def _check_words(self) -> "PcGroup":
        m = self.gens
        if not self.powers:
            self.powers = [[] for _ in range(m)]
        if len(self.powers) != m:
            raise ValueError(f"Expected {m} power relations, got {len(self.powers)}")
        for i, word in enumerate(self.powers, start=1):
            _check_word(word, above=i, gens=m, where=f"power relation of g{i}")
        seen = set()
        for j, i, word in self.commutators:
            if not 1 <= i < j <= m:
                raise ValueError(f"Commutator ({j}, {i}) needs 1 <= i < j <= {m}")
            if (j, i) in seen:
                raise ValueError(f"Commutator ({j}, {i}) given twice")
            seen.add((j, i))
            _check_word(word, above=j, gens=m, where=f"commutator [g{j}, g{i}]")
        if self.names is not None and len(self.names) != m:
            raise ValueError("names must list one name per generator")
        return self

    @property
    def order(self) -> int:
        return self.prime**self.gens


def _check_word(word: Word, above: int, gens: int, where: str) -> None:
    for gen, _ in word:
        if not above < gen <= gens:
            raise ValueError(f"{where} uses g{gen}; only g{above + 1}..g{gens} are allowed")


class NilpotentGroup(BaseModel):
    """Finite nilpotent group stored as the direct product of its Sylow subgroups."""

    sylows: Dict[int, PcGroup] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_primes(self) -> "NilpotentGroup":
        for l, sylow in self.sylows.items():
            if sylow.prime != l:
                raise ValueError(f"Sylow keyed by {l} is a {sylow.prime}-group")
        self.sylows = {l: self.sylows[l] for l in sorted(self.sylows) if self.sylows[l].gens > 0}
        return self

    @classmethod
    def from_sylows(cls, *sylows: PcGroup) -> "NilpotentGroup":
        primes = [sylow.prime for sylow in sylows]
        if len(set(primes)) != len(primes):
            raise ValueError(f"Sylow primes must be distinct, got {primes}")
        return cls(sylows={sylow.prime: sylow for sylow in sylows})

    @property
    def primes(self) -> List[int]:
        return sorted(self.sylows)

    @property
    def order(self) -> int:
        result = 1
        for sylow in self.sylows.values():
            result *= sylow.order
        return result


class FieldKind(str, Enum):
    """Base fields the tool knows about."""

    RATIONAL = "Q"
    IMAGINARY_QUADRATIC = "imaginary_quadratic"
    CUSTOM = "custom"


class FieldData(BaseModel):
    """Arithmetic invariants of the base field K that enter the bounds."""

    kind: FieldKind
    label: str
    disc: Optional[int] = None
    unit_rank: int = Field(default=0, ge=0, description="s, the Z-rank of the units")
    class_ranks: Dict[int, int] = Field(default_factory=dict, description="r_l per prime l")
    class_number: int = Field(default=1, ge=1)
    torsion: int = Field(default=2, ge=2, description="|mu_K|")
    l_square_primes: List[int] = Field(
        default_factory=list, description="primes l with an ideal class of order l^2"
    )

    def class_rank(self, l: int) -> int:
        return self.class_ranks.get(l, 0)


class SeriesReport(BaseModel):
    prime: int
    order: int
    lcs_orders: List[int]
    quotient_ranks: List[int]
    quotient_invariants: List[List[int]]
    nilpotency_class: int
    d: int
    exponent: int


class StepKind(str, Enum):
    SPLIT = "split"
    FRATTINI = "frattini"


class TowerStep(BaseModel):
    layer_index: int
    kind: StepKind
    kernel_cyclic_orders: List[int]
    costs_extra_prime: bool


class CentralTowerPlan(BaseModel):
    prime: int
    steps: List[TowerStep] = Field(default_factory=list)
    predicted_prime_count: int = 0


class BoundKind(str, Enum):
    ABELIAN = "abelian"
    RAMIFICATION = "ramification"
    FALLBACK = "fallback"


class BoundReport(BaseModel):
    bound: int
    kind: BoundKind
    d: int
    r: int
    s: int
    lcs_tail: int
    notes: List[str] = Field(default_factory=list)


class BoundTable(BaseModel):
    """Every bound the theory provides for one group and field, side by side."""

    t: int
    serre: int
    geyer_jarden: int
    lcs_sum: int
    ramification_bound: int
    class_two: Optional[int] = None
    boston: int


class Sgl3Record(BaseModel):
    n: int
    l: int
    expected_ram: int
    center_order: int
    center_rank: int
    multiplicator_claim: str
    group: PcGroup


class PrimePower(BaseModel):
    l: int
    e: int = Field(ge=1)

    @field_validator("l")
    @classmethod
    def _prime(cls, value: int) -> int:
        if not isprime(value):
            raise ValueError(f"{value} is not prime")
        return value

    @property
    def value(self) -> int:
        return self.l**self.e


class DirichletCharacter(BaseModel):
    """Character of (Z/q)^x of exact order b sending the generator g to zeta_b."""

    conductor: int
    order: int
    generator: int


class CyclicFieldSpec(BaseModel):
    conductor: int
    degree: int
    character: DirichletCharacter
    defining_poly: List[int] = Field(description="coefficients, constant term first")


class AbelianRealization(BaseModel):
    invariant_factors: List[int]
    specs: List[CyclicFieldSpec]
    ramified_primes: List[int]

    @property
    def conductors(self) -> List[int]:
        return [spec.conductor for spec in self.specs]


class QuadField(BaseModel):
    disc: int
    delta: int = Field(description="omega = (delta + sqrt(D)) / 2")
    torsion: int

    @property
    def label(self) -> str:
        return f"Q(sqrt({self.disc}))"


class QuadClassGroup(BaseModel):
    disc: int
    forms: List[Tuple[int, int, int]]
    class_number: int
    invariants: List[int]
    l_ranks: Dict[int, int] = Field(default_factory=dict)
    l_square_primes: List[int] = Field(default_factory=list)


class IdealPowerGenerator(BaseModel):
    """Generator a of the principal ideal a^l for a prime ideal in a class of order l."""

    disc: int
    l: int
    class_form: Tuple[int, int, int]
    prime_norm: int
    prime_form: Tuple[int, int, int]
    x: int
    y: int
    norm: int


class ResidueClass(BaseModel):
    disc: int
    q: int
    root: Optional[int] = None
    value: Optional[int] = None
    pair: Optional[Tuple[int, int]] = None
    inert: bool = False


class ConditionKind(str, Enum):
    CONGRUENCE = "congruence"
    POWER_RESIDUE = "power_residue"
    NON_RESIDUE = "non_residue"
    RESIDUE_CLASS = "residue_class"
    INERT_POWER = "inert_power"


class Condition(BaseModel):
    """One replayable assertion.

    congruence [a, r, m]: a = r mod m; power_residue / non_residue [a, m, q]: a is (not) an
    m-th power mod q; residue_class [x, y, D, q, root, value]: root is a root of the minimal
    polynomial of omega mod q and x + y*root = value mod q; inert_power [x, y, D, m, q]:
    x + y*omega is an m-th power in the residue field of the inert prime q.
    """

    kind: ConditionKind
    args: List[int]
    holds: bool
    label: str = ""


class KummerGenerator(BaseModel):
    label: str
    element: Tuple[int, int]
    exponent: int


class GoverningFieldDescription(BaseModel):
    field_label: str
    l: int
    N: int
    base_level: int
    kummer_generators: List[KummerGenerator] = Field(default_factory=list)


class ExceptionalPrime(BaseModel):
    prime: int
    index: int
    root: Optional[int] = None
    conditions: List[Condition] = Field(default_factory=list)


class ExceptionalSet(BaseModel):
    field_label: str
    primes: List[int] = Field(description="the primes l the set serves")
    N: int
    modulus: int
    members: List[ExceptionalPrime] = Field(default_factory=list)

    @property
    def t_primes(self) -> List[int]:
        return [member.prime for member in self.members]


class ScholzConstraints(BaseModel):
    """Local conditions a layer of conductors must satisfy."""

    primes: List[int]
    N: int = Field(ge=1)
    s0: List[int] = Field(default_factory=list)
    t_primes: List[int] = Field(default_factory=list)
    ramified: List[int] = Field(default_factory=list)
    inert_disc: Optional[int] = Field(
        default=None, description="conductors must be inert in Q(sqrt(D)) when set"
    )

    @field_validator("primes")
    @classmethod
    def _odd_primes(cls, value: List[int]) -> List[int]:
        for l in value:
            if l == 2 or not isprime(l):
                raise ValueError(f"Scholz conditions need odd primes, got {l}")
        return sorted(set(value))

    @property
    def l(self) -> int:
        if len(self.primes) != 1:
            raise ValueError(f"Constraints serve several primes: {self.primes}")
        return self.primes[0]


class ScholzConditionReport(BaseModel):
    level: int
    conditions: List[Condition]
    passed: bool


class Justification(str, Enum):
    SPLIT_CASE = "SplitCase"
    EXISTENCE_REMRAM = "Existence+RemRam"
    SCHOLZ_REPAIR = "ScholzRepair"
    FINAL_REMRAM = "FinalRemRam"


class CertificateStep(BaseModel):
    step_id: str
    layer: int
    justification: Justification
    primes: List[int] = Field(default_factory=list)
    kernel_orders: Dict[int, List[int]] = Field(default_factory=dict)
    conditions: List[Condition] = Field(default_factory=list)


class ScholzCertificate(BaseModel):
    schema_tag: str = Field(default=SCHEMA_TAG, alias="schema")
    group: NilpotentGroup
    field: FieldData
    plans: Dict[int, CentralTowerPlan]
    N: int
    s0: List[int]
    exceptional_set: Optional[ExceptionalSet] = None
    abelian_layer: Optional[AbelianRealization] = None
    steps: List[CertificateStep] = Field(default_factory=list)
    total_ramified: List[int] = Field(default_factory=list)
    bound: int
    bound_kind: BoundKind
    bound_ok: bool
    tame: bool
    real: bool
    trust_notes: List[str] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


class VerificationReport(BaseModel):
    passed: bool
    conditions_checked: int
    failures: List[str] = Field(default_factory=list)


class FactorReport(BaseModel):
    conductor: int
    degree: int
    poly_disc: int
    ramified_primes: List[int]
    disc_divisible: bool


class RamificationReport(BaseModel):
    polynomials: List[List[int]]
    poly_disc: int
    field_disc: Optional[int] = None
    ramified_primes: List[int]
    expected: List[int]
    inconclusive: List[int] = Field(default_factory=list)
    verdict: bool
    factors: List[FactorReport] = Field(default_factory=list)


class FrobeniusReport(BaseModel):
    conductor: int
    degree: int
    bound: int
    primes_tested: int
    sample: Dict[str, int] = Field(description="cycle type -> count")
    mismatches: List[int] = Field(default_factory=list)
    split_fraction: float
    expected_fraction: float


class CommandResult(BaseModel):
    schema_tag: str = Field(default=SCHEMA_TAG, alias="schema")
    command: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    payload: Dict[str, Any] = Field(default_factory=dict)
    elapsed_ms: float

    model_config = {"populate_by_name": True}
