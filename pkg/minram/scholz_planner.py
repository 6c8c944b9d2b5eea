"""Prime systems for Scholz-type tower constructions and the certificates recording them."""

import logging
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from sympy import factorint

from .arith import (
    crt,
    invariant_factors,
    is_prime,
    power_residue,
    prime_divisors,
    prime_power,
)
from .config import Settings
from .cyclotomic import check_scholz_degree, realize_abelian, scholz_modulus
from .errors import (
    ArithmeticDomainError,
    CertificateError,
    FieldDataError,
    MinramError,
    TorsionClashError,
)
from .group_core import (
    bound_report,
    central_tower_plan,
    is_abelian,
    nilpotent_invariants,
    nilpotent_series,
)
from .models import (
    AbelianRealization,
    BoundKind,
    CertificateStep,
    Condition,
    ConditionKind,
    ExceptionalPrime,
    ExceptionalSet,
    FieldData,
    FieldKind,
    GoverningFieldDescription,
    Justification,
    KummerGenerator,
    NilpotentGroup,
    ScholzCertificate,
    ScholzConditionReport,
    ScholzConstraints,
    VerificationReport,
)
from .quadfield import (
    BinaryForm,
    ideal_power_generator,
    inert_power_residue,
    norm,
    omega_roots,
    quad_field,
    reduced_forms,
    residue_class,
    splits,
)
from .search import least_prime

logger = logging.getLogger(__name__)

TRUST_BOUNDARY = (
    "Only the local conditions consumed by the embedding-problem arguments are certified; "
    "the twisting of solutions by cocycles is not modelled."
)

KUMMER_NOTE = (
    "Over K each Frattini prime q is checked against -1 and the rational primes of S as l^e-th "
    "powers mod q, and against the ideal-power generators a_j as l-th powers in the residue "
    "field of the inert prime q. Generators of prime ideals above split primes of S are not "
    "checked separately. K has no units of infinite order."
)


# -- conditions --------------------------------------------------------------------------


def evaluate(condition: Condition) -> bool:
    """Re-check one condition with plain arithmetic."""
    args = condition.args
    try:
        if condition.kind == ConditionKind.CONGRUENCE:
            a, r, m = args
            return m > 0 and (a - r) % m == 0
        if condition.kind == ConditionKind.POWER_RESIDUE:
            return power_residue(*args)
        if condition.kind == ConditionKind.NON_RESIDUE:
            return not power_residue(*args)
        if condition.kind == ConditionKind.INERT_POWER:
            x, y, disc, m, q = args
            return inert_power_residue(disc, x, y, m, q)
        x, y, disc, q, root, value = args
        delta = disc % 2
        on_curve = (root * root - delta * root + (delta - disc) // 4) % q == 0
        return is_prime(q) and on_curve and (x + y * root - value) % q == 0
    except (MinramError, ValueError, TypeError):
        return False


def congruence(a: int, r: int, m: int, label: str = "") -> Condition:
    condition = Condition(kind=ConditionKind.CONGRUENCE, args=[a, r, m], holds=False, label=label)
    condition.holds = evaluate(condition)
    return condition


def residue(a: int, m: int, q: int, label: str = "", expected: bool = True) -> Condition:
    kind = ConditionKind.POWER_RESIDUE if expected else ConditionKind.NON_RESIDUE
    condition = Condition(kind=kind, args=[a, m, q], holds=False, label=label)
    condition.holds = evaluate(condition)
    return condition


def inert_power(disc: int, x: int, y: int, m: int, q: int, label: str = "") -> Condition:
    condition = Condition(
        kind=ConditionKind.INERT_POWER, args=[x, y, disc, m, q], holds=False, label=label
    )
    condition.holds = evaluate(condition)
    return condition


def _key(condition: Condition) -> Tuple[str, Tuple[int, ...]]:
    return condition.kind.value, tuple(condition.args)


def split_conditions(q: int, b: int, inert_disc: Optional[int]) -> List[Condition]:
    """Conditions on a plain (non-Scholz) conductor."""
    conditions = [congruence(q, 1, b, f"conductor {q} = 1 mod {b}")]
    if inert_disc is not None:
        conditions.append(residue(inert_disc, 2, q, f"{q} inert in K", expected=False))
    return conditions


def abelian_conditions(
    conductors: Sequence[Tuple[int, int]], constraints: ScholzConstraints, level: int
) -> Dict[int, List[Condition]]:
    """Scholz conditions on a layer of (conductor, degree) pairs, grouped by conductor.

    Norm condition: each q_j = 1 mod l^level for l | b_j. Decomposition equals inertia at
    q_i: q_i is a b_j-th power mod every other q_j. The primes of S_0, T and the already
    ramified set split completely: each is a b_j-th power mod q_j.
    """
    grouped: Dict[int, List[Condition]] = {}
    level_constraints = constraints.model_copy(update={"N": level})
    fixed = sorted(set(constraints.s0) | set(constraints.t_primes) | set(constraints.ramified))
    for q, b in conductors:
        conditions = [
            congruence(q, 1, scholz_modulus(b, level_constraints), f"norm of {q} = 1 mod l^{level}")
        ]
        for other, _ in conductors:
            if other != q:
                conditions.append(residue(other, b, q, f"D = I at {other} in the Z/{b} field"))
        for p in fixed:
            conditions.append(residue(p, b, q, f"{p} splits in the Z/{b} field of conductor {q}"))
        if constraints.inert_disc is not None:
            conditions.append(
                residue(constraints.inert_disc, 2, q, f"{q} inert in K", expected=False)
            )
        grouped[q] = conditions
    return grouped


def frattini_conditions(
    q: int,
    exponents: Dict[int, int],
    constraints: ScholzConstraints,
    ramified: Iterable[int],
    conductors: Sequence[Tuple[int, int]],
    kummer: Optional[Dict[int, List[KummerGenerator]]] = None,
) -> List[Condition]:
    """Conditions on the new prime of a Frattini step.

    For every l in the step: q = 1 mod l^N, and -1, the S_0 primes, T and the ramified
    primes are l^e-th power residues mod q. q splits completely in the abelian layer.
    Over K the ideal-power generators of l are l-th powers in the residue field of the
    inert prime q; with q = 1 mod l^N that is the same as a_j^(l^(e-1)) being an l^e-th power.
    """
    generators = sorted({-1} | set(constraints.s0) | set(constraints.t_primes) | set(ramified))
    kummer = kummer or {}
    conditions = []
    for l in sorted(exponents):
        e = exponents[l]
        level, power = prime_power(l, constraints.N), prime_power(l, e)
        conditions.append(congruence(q, 1, level.value, f"{q} = 1 mod {l}^{level.e}"))
        for g in generators:
            conditions.append(residue(g, power.value, q, f"{g} is an {l}^{e}-th power mod {q}"))
        if constraints.inert_disc is not None:
            for generator in kummer.get(l, []):
                x, y = generator.element
                conditions.append(
                    inert_power(
                        constraints.inert_disc,
                        x,
                        y,
                        l,
                        q,
                        f"{generator.label} is an {l}-th power at {q}",
                    )
                )
    for conductor, b in conductors:
        conditions.append(residue(q, b, conductor, f"{q} splits in the Z/{b} field of {conductor}"))
    if constraints.inert_disc is not None:
        conditions.append(residue(constraints.inert_disc, 2, q, f"{q} inert in K", expected=False))
    return conditions


def exceptional_conditions(
    disc: int,
    q: int,
    index: int,
    modulus: int,
    generators: Dict[int, List[KummerGenerator]],
) -> List[Condition]:
    """Residue pattern of the index-th exceptional prime: a_index(l) is not an l-th power at q,
    every other generator is."""
    conditions = [
        congruence(q, 1, modulus, f"{q} = 1 mod {modulus}"),
        residue(disc, 2, q, f"{q} splits in K"),
    ]
    for l in sorted(generators):
        for j, generator in enumerate(generators[l], start=1):
            x, y = generator.element
            image = residue_class(disc, x, y, q)
            located = Condition(
                kind=ConditionKind.RESIDUE_CLASS,
                args=[x, y, disc, q, image.root, image.value],
                holds=False,
                label=f"{generator.label} mod a prime above {q}",
            )
            located.holds = evaluate(located)
            conditions.append(located)
            conditions.append(
                residue(
                    image.value,
                    l,
                    q,
                    f"{generator.label} {'not ' if j == index else ''}an {l}-th power at {q}",
                    expected=j != index,
                )
            )
    return conditions


def check_scholz_abelian(
    realization: AbelianRealization, constraints: ScholzConstraints, level: Optional[int] = None
) -> ScholzConditionReport:
    """Evaluate the Scholz conditions of an abelian layer at level `level` <= N."""
    level = constraints.N if level is None else level
    if not 1 <= level <= constraints.N:
        raise ArithmeticDomainError(f"Level must lie in 1..{constraints.N}, got {level}")
    for spec in realization.specs:
        check_scholz_degree(spec.degree, constraints)
    pairs = [(spec.conductor, spec.degree) for spec in realization.specs]
    grouped = abelian_conditions(pairs, constraints, level)
    conditions = [c for group in grouped.values() for c in group]
    return ScholzConditionReport(
        level=level, conditions=conditions, passed=all(c.holds for c in conditions)
    )


# -- planner -----------------------------------------------------------------------------


class ScholzPlanner:
    """Runs the prime searches of a tower construction and assembles certificates."""

    def __init__(
        self, settings: Optional[Settings] = None, logger: Optional[logging.Logger] = None
    ):
        self.settings = settings or Settings()
        self.logger = logger or logging.getLogger(__name__)

    @property
    def limit(self) -> int:
        return self.settings.scan_limit

    def _scan(
        self,
        modulus: int,
        predicate: Callable[[int], bool],
        avoid: Set[int],
        conditions: Sequence[str],
    ) -> int:
        return least_prime(
            modulus,
            predicate,
            limit=self.limit,
            avoid=avoid,
            jobs=self.settings.jobs,
            conditions=conditions,
        )

    # governing fields and exceptional sets

    def governing_field(self, field: FieldData, l: int, N: int) -> GoverningFieldDescription:
        """Kummer generators of the governing field over K(mu_{l^N})."""
        if field.torsion % l == 0:
            raise TorsionClashError(l, field.label)
        description = GoverningFieldDescription(field_label=field.label, l=l, N=N, base_level=l**N)
        if field.kind == FieldKind.RATIONAL:
            return description
        if field.kind == FieldKind.CUSTOM:
            if field.unit_rank or field.class_rank(l):
                raise FieldDataError(
                    f"Kummer generators of {field.label} cannot be computed; use Q or a "
                    "negative discriminant"
                )
            return description

        for j, form in enumerate(self._class_basis(field.disc, l), start=1):
            generator = ideal_power_generator(field.disc, l, form)
            description.kummer_generators.append(
                KummerGenerator(label=f"a_{j}", element=(generator.x, generator.y), exponent=l)
            )
        self.logger.debug(
            f"Governing field for {field.label}, l = {l}: {description.kummer_generators}"
        )
        return description

    @staticmethod
    def _class_basis(disc: int, l: int) -> List[Tuple[int, int, int]]:
        """Reduced forms of order l spanning Cl(K)[l], least forms first."""
        basis: List[BinaryForm] = []
        span = {BinaryForm.principal(disc)}
        for form in reduced_forms(disc):
            if form in span or not form.power(l).is_principal():
                continue
            basis.append(form)
            span = {s.compose(form.power(k)) for s in span for k in range(l)}
        return [tuple(form) for form in basis]

    def find_exceptional_set(
        self, field: FieldData, primes: Sequence[int], N: int, avoid: Iterable[int] = ()
    ) -> ExceptionalSet:
        """One prime per index j <= r carrying the diagonal residue pattern."""
        primes = sorted(set(primes))
        modulus = 1
        for l in primes:
            modulus *= l**N
        generators = {l: self.governing_field(field, l, N).kummer_generators for l in primes}
        exceptional = ExceptionalSet(field_label=field.label, primes=primes, N=N, modulus=modulus)
        r = max((len(g) for g in generators.values()), default=0)
        if r == 0:
            return exceptional

        disc = field.disc
        qf = quad_field(disc)
        norms = {norm(qf, *g.element) for gens in generators.values() for g in gens}
        excluded = set(avoid) | set(primes)
        for index in range(1, r + 1):

            def fits(q: int, index: int = index) -> bool:
                if disc % q == 0 or any(n % q == 0 for n in norms):
                    return False
                if not splits(disc, q):
                    return False
                conditions = exceptional_conditions(disc, q, index, modulus, generators)
                return all(c.holds for c in conditions)

            q = self._scan(
                modulus,
                fits,
                excluded,
                [f"q = 1 mod {modulus}", "q splits in K", f"residue pattern of index {index}"],
            )
            excluded.add(q)
            root = omega_roots(disc, q)[0]
            exceptional.members.append(
                ExceptionalPrime(
                    prime=q,
                    index=index,
                    root=root,
                    conditions=exceptional_conditions(disc, q, index, modulus, generators),
                )
            )
            self.logger.info(f"Exceptional prime of index {index} for {field.label}: {q}")
        return exceptional

    # abelian layer

    def find_scholz_abelian(
        self, factors: Sequence[int], constraints: ScholzConstraints
    ) -> Tuple[AbelianRealization, ScholzConditionReport]:
        """Least conductors satisfying the Scholz conditions, re-verified afterwards."""
        if any(n % 2 == 0 for n in factors):
            raise ArithmeticDomainError("Scholz realizations need an odd-order group")
        realization = realize_abelian(
            factors, constraints, limit=self.limit, jobs=self.settings.jobs
        )
        report = check_scholz_abelian(realization, constraints)
        if not report.passed:
            failed = [c.label for c in report.conditions if not c.holds]
            raise CertificateError(f"Chosen conductors fail Scholz conditions: {failed}")
        self.logger.info(f"Scholz abelian layer: conductors {realization.conductors}")
        return realization, report

    # Frattini steps

    def frattini_step_prime(
        self,
        exponents: Dict[int, int],
        constraints: ScholzConstraints,
        ramified: Sequence[int],
        conductors: Sequence[Tuple[int, int]],
        kummer: Optional[Dict[int, List[KummerGenerator]]] = None,
    ) -> Tuple[int, List[Condition]]:
        """Least prime for one cyclic Frattini sub-step, merged over the primes in `exponents`."""
        _, modulus = crt([(1, l**constraints.N) for l in exponents])
        avoid = set(constraints.s0) | set(constraints.t_primes) | set(ramified)

        def fits(q: int) -> bool:
            conditions = frattini_conditions(
                q, exponents, constraints, ramified, conductors, kummer
            )
            return all(c.holds for c in conditions)

        q = self._scan(
            modulus,
            fits,
            avoid,
            [
                f"q = 1 mod {modulus}",
                "-1, S_0, T and ramified primes are l^e-th powers",
                "ideal-power generators are l-th powers at q",
                "q splits in the abelian layer",
            ],
        )
        return q, frattini_conditions(q, exponents, constraints, ramified, conductors, kummer)

    # certificates

    def build_certificate(self, group: NilpotentGroup, field: FieldData) -> ScholzCertificate:
        """Choose every prime of the tower and record the conditions each one satisfies."""
        if field.kind == FieldKind.CUSTOM:
            raise FieldDataError("Certificates are built over Q or an imaginary quadratic field")
        if not group.sylows:
            raise CertificateError("The trivial group needs no ramification")

        report = bound_report(group, field)
        invariants = nilpotent_invariants(group)
        plans = {l: central_tower_plan(pc) for l, pc in group.sylows.items()}
        inert_disc = field.disc if field.kind == FieldKind.IMAGINARY_QUADRATIC else None
        s0 = sorted(set(group.primes) | set(prime_divisors(group.order)))

        certificate = ScholzCertificate(
            group=group,
            field=field,
            plans=plans,
            N=invariants["N"],
            s0=s0,
            bound=report.bound,
            bound_kind=report.kind,
            bound_ok=False,
            tame=False,
            real=False,
            trust_notes=[TRUST_BOUNDARY],
        )
        try:
            if is_abelian(group):
                self._abelian_certificate(certificate, inert_disc)
            else:
                self._tower_certificate(certificate, inert_disc)
        except CertificateError:
            raise
        except MinramError as e:
            self.logger.error(f"Certificate build failed: {e.message}")
            raise CertificateError(
                e.message, partial=certificate.model_dump(mode="json", by_alias=True)
            ) from e

        total = sorted({q for step in certificate.steps for q in step.primes})
        certificate.total_ramified = total
        certificate.bound_ok = len(total) <= certificate.bound
        certificate.tame = all(group.order % q for q in total)
        certificate.real = field.kind == FieldKind.RATIONAL and group.order % 2 == 1
        self.logger.info(
            f"Certificate for |G| = {group.order} over {field.label}: {len(total)} primes "
            f"{total}, bound {certificate.bound}"
        )
        return certificate

    def _abelian_certificate(
        self, certificate: ScholzCertificate, inert_disc: Optional[int]
    ) -> None:
        series = nilpotent_series(certificate.group).values()
        factors = [b for report in series for b in report.quotient_invariants[0]]
        realization = realize_abelian(
            factors, limit=self.limit, jobs=self.settings.jobs, inert_disc=inert_disc
        )
        certificate.abelian_layer = realization
        for j, spec in enumerate(realization.specs, start=1):
            certificate.steps.append(
                CertificateStep(
                    step_id=f"L1.{j}",
                    layer=1,
                    justification=Justification.SPLIT_CASE,
                    primes=[spec.conductor],
                    kernel_orders=_kernel_orders(spec.degree),
                    conditions=split_conditions(spec.conductor, spec.degree, inert_disc),
                )
            )

    def _tower_certificate(
        self, certificate: ScholzCertificate, inert_disc: Optional[int]
    ) -> None:
        group, field = certificate.group, certificate.field
        series = nilpotent_series(group)

        exceptional = self.find_exceptional_set(field, group.primes, certificate.N, certificate.s0)
        certificate.exceptional_set = exceptional
        t_primes = exceptional.t_primes
        kummer = {
            l: self.governing_field(field, l, certificate.N).kummer_generators
            for l in group.primes
        }
        if field.kind == FieldKind.IMAGINARY_QUADRATIC:
            certificate.trust_notes.append(KUMMER_NOTE)
        if certificate.bound_kind == BoundKind.FALLBACK:
            certificate.trust_notes.append(
                "K has ideal classes of order l^2; the bound is max n_l + t(K)."
            )

        constraints = ScholzConstraints(
            primes=group.primes,
            N=certificate.N,
            s0=certificate.s0,
            t_primes=t_primes,
            inert_disc=inert_disc,
        )

        # layer 1: one conductor per invariant factor of G^ab
        factors = [b for report in series.values() for b in report.quotient_invariants[0]]
        realization, _ = self.find_scholz_abelian(factors, constraints)
        certificate.abelian_layer = realization
        conductors = [(spec.conductor, spec.degree) for spec in realization.specs]
        grouped = abelian_conditions(conductors, constraints, certificate.N)
        for j, spec in enumerate(realization.specs, start=1):
            certificate.steps.append(
                CertificateStep(
                    step_id=f"L1.{j}",
                    layer=1,
                    justification=Justification.SPLIT_CASE,
                    primes=[spec.conductor],
                    kernel_orders=_kernel_orders(spec.degree),
                    conditions=grouped[spec.conductor],
                )
            )
        if t_primes:
            certificate.steps.append(
                CertificateStep(
                    step_id="T",
                    layer=1,
                    justification=Justification.EXISTENCE_REMRAM,
                    primes=list(t_primes),
                    conditions=[c for m in exceptional.members for c in m.conditions],
                )
            )

        ramified = [q for q, _ in conductors]
        for shape in step_layout(group, len(t_primes)):
            if shape.justification == Justification.FINAL_REMRAM:
                certificate.steps.append(
                    CertificateStep(
                        step_id=shape.step_id,
                        layer=shape.layer,
                        justification=shape.justification,
                        kernel_orders=shape.kernel_orders,
                    )
                )
            elif shape.justification == Justification.SCHOLZ_REPAIR:
                exponents = {
                    l: _exponent(orders[0], l) for l, orders in shape.kernel_orders.items()
                }
                q, conditions = self.frattini_step_prime(
                    exponents, constraints, ramified, conductors, kummer
                )
                self.logger.info(f"Step {shape.step_id}: prime {q}")
                certificate.steps.append(
                    CertificateStep(
                        step_id=shape.step_id,
                        layer=shape.layer,
                        justification=shape.justification,
                        primes=[q],
                        kernel_orders=shape.kernel_orders,
                        conditions=conditions,
                    )
                )
                ramified.append(q)


class StepShape(NamedTuple):
    step_id: str
    layer: int
    justification: Justification
    kernel_orders: Dict[int, List[int]]
    new_primes: int


def step_layout(group: NilpotentGroup, t_count: int) -> List[StepShape]:
    """The steps a certificate of `group` must contain, in order.

    One split step per invariant factor of G^ab, a T step when exceptional primes are used,
    one repair step per cyclic factor of layers 2..c-1 (merged across the Sylow subgroups
    still active) and a closing step wherever a Sylow subgroup reaches its class.
    """
    series = nilpotent_series(group)
    factors = [b for report in series.values() for b in report.quotient_invariants[0]]
    layout = [
        StepShape(f"L1.{j}", 1, Justification.SPLIT_CASE, _kernel_orders(b), 1)
        for j, b in enumerate((b for b in invariant_factors(factors) if b > 1), start=1)
    ]
    if is_abelian(group):
        return layout
    if t_count:
        layout.append(StepShape("T", 1, Justification.EXISTENCE_REMRAM, {}, t_count))

    # layers 2..c-1 cost one prime per cyclic factor; each Sylow's last layer costs none
    c = max(r.nilpotency_class for r in series.values())
    for i in range(2, c + 1):
        active = {l: r for l, r in series.items() if i <= r.nilpotency_class - 1}
        width = max((len(r.quotient_invariants[i - 1]) for r in active.values()), default=0)
        for k in range(width):
            orders = {
                l: [r.quotient_invariants[i - 1][k]]
                for l, r in active.items()
                if k < len(r.quotient_invariants[i - 1])
            }
            layout.append(
                StepShape(f"L{i}.{k + 1}", i, Justification.SCHOLZ_REPAIR, orders, 1)
            )
        closing = {
            l: r.quotient_invariants[i - 1] for l, r in series.items() if r.nilpotency_class == i
        }
        if closing:
            layout.append(StepShape(f"L{i}.final", i, Justification.FINAL_REMRAM, closing, 0))
    return layout


def _exponent(order: int, l: int) -> int:
    e = 0
    while order % l == 0:
        order //= l
        e += 1
    return e


def _kernel_orders(b: int) -> Dict[int, List[int]]:
    return {p: [p**e] for p, e in sorted(factorint(b).items())}


def _degree(step: CertificateStep) -> int:
    degree = 1
    for orders in step.kernel_orders.values():
        for order in orders:
            degree *= order
    return degree


# -- verification ------------------------------------------------------------------------


def verify_certificate(certificate: ScholzCertificate) -> VerificationReport:
    """Replay every condition of a certificate and re-derive the ones it must contain."""
    failures: List[str] = []
    checked = 0

    for step in certificate.steps:
        for condition in step.conditions:
            checked += 1
            if not condition.holds or not evaluate(condition):
                failures.append(f"{step.step_id}: {condition.kind.value} {condition.args} fails")
        for q in step.primes:
            if not is_prime(q):
                failures.append(f"{step.step_id}: {q} is not prime")
        if step.justification == Justification.FINAL_REMRAM and step.primes:
            failures.append(f"{step.step_id}: the last layer must not add primes")

    field = certificate.field
    inert_disc = field.disc if field.kind == FieldKind.IMAGINARY_QUADRATIC else None
    split_steps = [s for s in certificate.steps if s.justification == Justification.SPLIT_CASE]
    conductors = [(s.primes[0], _degree(s)) for s in split_steps if len(s.primes) == 1]
    if len(conductors) != len(split_steps):
        failures.append("every layer-1 step must name exactly one conductor")
    if certificate.abelian_layer is not None:
        if sorted(certificate.abelian_layer.conductors) != sorted(q for q, _ in conductors):
            failures.append("abelian layer conductors differ from the layer-1 steps")

    try:
        expected = _expected_conditions(certificate, conductors, inert_disc)
    except MinramError as e:
        failures.append(f"conditions cannot be re-derived: {e.message}")
        expected = {}
    for step in certificate.steps:
        stored = {_key(c) for c in step.conditions}
        for condition in expected.get(step.step_id, []):
            if _key(condition) not in stored:
                failures.append(f"{step.step_id}: missing {condition.label or condition.args}")

    failures.extend(_structure_failures(certificate))

    total = sorted({q for step in certificate.steps for q in step.primes})
    if total != sorted(certificate.total_ramified):
        failures.append(f"total_ramified {certificate.total_ramified} should be {total}")
    try:
        bound = bound_report(certificate.group, field).bound
        if bound != certificate.bound:
            failures.append(f"bound {certificate.bound} should be {bound}")
    except MinramError as e:
        failures.append(f"bound cannot be recomputed: {e.message}")
        bound = certificate.bound
    if certificate.bound_ok != (len(total) <= bound):
        failures.append("bound_ok does not match the prime count")
    if not certificate.bound_ok:
        failures.append(f"{len(total)} ramified primes exceed the bound {bound}")

    logger.debug(f"Replayed {checked} conditions, {len(failures)} failures")
    return VerificationReport(passed=not failures, conditions_checked=checked, failures=failures)


def _structure_failures(certificate: ScholzCertificate) -> List[str]:
    """Compare the certificate's steps, plans and prime count with what its group needs."""
    group = certificate.group
    failures: List[str] = []
    try:
        plans = {l: central_tower_plan(pc) for l, pc in group.sylows.items()}
        invariants = nilpotent_invariants(group)
        abelian = is_abelian(group)
    except MinramError as e:
        return [f"the group cannot be analysed: {e.message}"]
    dumped = {l: plan.model_dump() for l, plan in certificate.plans.items()}
    if {l: plan.model_dump() for l, plan in plans.items()} != dumped:
        failures.append("tower plans differ from the lower central series of the group")
    if certificate.N != invariants["N"]:
        failures.append(f"N = {certificate.N} should be {invariants['N']}")
    s0 = sorted(set(group.primes) | set(prime_divisors(group.order)))
    if sorted(certificate.s0) != s0:
        failures.append(f"s0 {certificate.s0} should be {s0}")

    exceptional = certificate.exceptional_set
    t_count = 0
    if not abelian:
        if exceptional is None:
            failures.append("the exceptional set is missing")
        else:
            t_count = len(exceptional.members)
            failures.extend(_exceptional_failures(certificate, exceptional))

    layout = step_layout(group, t_count)
    expected_ids = [shape.step_id for shape in layout]
    actual_ids = [step.step_id for step in certificate.steps]
    missing = [s for s in expected_ids if s not in actual_ids]
    extra = [s for s in actual_ids if s not in expected_ids]
    if missing:
        failures.append(f"missing steps {missing}")
    if extra:
        failures.append(f"unexpected steps {extra}")
    if len(set(actual_ids)) != len(actual_ids):
        failures.append("step ids repeat")
    elif not missing and not extra and actual_ids != expected_ids:
        failures.append(f"steps are out of order, expected {expected_ids}")

    by_id = {step.step_id: step for step in certificate.steps}
    for shape in layout:
        step = by_id.get(shape.step_id)
        if step is None:
            continue
        if (step.layer, step.justification) != (shape.layer, shape.justification):
            failures.append(
                f"{shape.step_id}: expected layer {shape.layer} with {shape.justification.value}"
            )
        if step.kernel_orders != shape.kernel_orders:
            failures.append(
                f"{shape.step_id}: kernel orders {step.kernel_orders} should be "
                f"{shape.kernel_orders}"
            )
        if len(step.primes) != shape.new_primes:
            failures.append(
                f"{shape.step_id}: {len(step.primes)} primes where {shape.new_primes} are needed"
            )

    needed = sum(shape.new_primes for shape in layout)
    found = len(set(certificate.total_ramified))
    if found != needed:
        failures.append(f"{found} ramified primes where the tower needs exactly {needed}")
    return failures


def _exceptional_failures(
    certificate: ScholzCertificate, exceptional: ExceptionalSet
) -> List[str]:
    group = certificate.group
    if sorted(exceptional.primes) != group.primes or exceptional.N != certificate.N:
        return [f"the exceptional set serves {exceptional.primes} at level {exceptional.N}"]
    try:
        planner = ScholzPlanner()
        r = max(
            len(planner.governing_field(certificate.field, l, certificate.N).kummer_generators)
            for l in group.primes
        )
    except MinramError as e:
        return [f"the governing field cannot be recomputed: {e.message}"]
    indices = sorted(member.index for member in exceptional.members)
    if indices != list(range(1, r + 1)):
        return [f"exceptional primes carry indices {indices}, expected 1..{r}"]
    return []


def _expected_conditions(
    certificate: ScholzCertificate,
    conductors: List[Tuple[int, int]],
    inert_disc: Optional[int],
) -> Dict[str, List[Condition]]:
    expected: Dict[str, List[Condition]] = {}
    group = certificate.group
    if is_abelian(group):
        for step in certificate.steps:
            if step.justification == Justification.SPLIT_CASE and step.primes:
                expected[step.step_id] = split_conditions(step.primes[0], _degree(step), inert_disc)
        return expected

    exceptional = certificate.exceptional_set
    t_primes = exceptional.t_primes if exceptional else []
    constraints = ScholzConstraints(
        primes=group.primes,
        N=certificate.N,
        s0=certificate.s0,
        t_primes=t_primes,
        inert_disc=inert_disc,
    )
    grouped = abelian_conditions(conductors, constraints, certificate.N)
    planner = ScholzPlanner()
    kummer = {
        l: planner.governing_field(certificate.field, l, certificate.N).kummer_generators
        for l in group.primes
    }
    ramified = [q for q, _ in conductors]
    for step in certificate.steps:
        if step.justification == Justification.SPLIT_CASE and step.primes:
            expected[step.step_id] = grouped.get(step.primes[0], [])
        elif step.justification == Justification.SCHOLZ_REPAIR and step.primes:
            exponents = {
                l: _exponent(orders[0], l) for l, orders in step.kernel_orders.items() if orders
            }
            q = step.primes[0]
            expected[step.step_id] = frattini_conditions(
                q, exponents, constraints, ramified, conductors, kummer
            )
            ramified = ramified + [q]
        elif step.justification == Justification.EXISTENCE_REMRAM and exceptional:
            if sorted(step.primes) != sorted(t_primes):
                raise CertificateError("The T step does not match the exceptional set")
            generators = {
                l: planner.governing_field(certificate.field, l, certificate.N).kummer_generators
                for l in exceptional.primes
            }
            expected[step.step_id] = [
                c
                for member in exceptional.members
                for c in exceptional_conditions(
                    certificate.field.disc,
                    member.prime,
                    member.index,
                    exceptional.modulus,
                    generators,
                )
            ]
    return expected
