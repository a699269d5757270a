"""
Index-leakage analysis.

The closed forms are the entropies of the per-segment sparse counts: the
ordered histogram when only subpackets inside a segment are shuffled, and
its multiset when segments are shuffled as well. brute_force_mi recomputes
I(X; Y) from the joint distribution of real and permuted index sets by
enumerating every permutation, and is the oracle for both.
"""

import csv
import itertools
import math
from collections import Counter, defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import rel_entr
from scipy.stats import entropy

from app.config import get_settings
from app.logging_config import get_logger
from app.models.leakage import LeakageRow, PatternDistribution, Probability, SegmentHistogram
from app.models.params import SchemeCase, as_case
from app.services.cost_accountant import storage_counts
from app.utils.errors import IndexOutOfRange, InfeasibleEnumeration, InvalidB, InvalidParams


logger = get_logger(__name__)

WITHIN = "within"
WITHIN_INTER = "within+inter"
MODES = (WITHIN, WITHIN_INTER)


def check_segments(num_subpackets: int, num_segments: int) -> None:
    if num_segments < 1 or num_subpackets % num_segments:
        raise InvalidB(f"number of segments B={num_segments} must divide P={num_subpackets}")


def histogram_of(x: Iterable[int], num_subpackets: int, num_segments: int) -> SegmentHistogram:
    """Sparse subpackets per segment; segment i holds subpackets (i-1)P/B+1 .. iP/B."""
    check_segments(num_subpackets, num_segments)
    size = num_subpackets // num_segments
    counts = [0] * num_segments
    for s in x:
        if not 1 <= s <= num_subpackets:
            raise IndexOutOfRange(f"subpacket {s} outside 1..{num_subpackets}")
        counts[(s - 1) // size] += 1
    return SegmentHistogram(counts=tuple(counts))


def entropy_bits(probabilities: Iterable[Probability], base: float = 2) -> float:
    """Shannon entropy; zero-probability terms contribute nothing."""
    values = np.array([float(p) for p in probabilities if p], dtype=np.float64)
    if values.size <= 1:
        return 0.0
    return float(entropy(values, base=base))


def histogram_distribution(dist: PatternDistribution) -> Dict[Tuple[int, ...], Probability]:
    """Induced distribution of the ordered histogram."""
    out: Dict[Tuple[int, ...], Probability] = defaultdict(int)
    for subset, p in dist.mass.items():
        out[histogram_of(subset, dist.num_subpackets, dist.num_segments).counts] += p
    return dict(out)


def multiset_distribution(dist: PatternDistribution) -> Dict[Tuple[int, ...], Probability]:
    """Induced distribution of the histogram multiset, summed over its orderings."""
    out: Dict[Tuple[int, ...], Probability] = defaultdict(int)
    for counts, p in histogram_distribution(dist).items():
        out[SegmentHistogram(counts=counts).multiset] += p
    return dict(out)


def entropy_hat(dist: PatternDistribution, base: float = 2) -> float:
    """Leakage with within-segment permutations only."""
    return entropy_bits(histogram_distribution(dist).values(), base)


def entropy_tilde(dist: PatternDistribution, base: float = 2) -> float:
    """Leakage with inter-segment permutations added."""
    return entropy_bits(multiset_distribution(dist).values(), base)


def enumeration_size(dist: PatternDistribution, mode: str) -> int:
    """Number of (pattern, permutation) pairs brute_force_mi visits."""
    return relabeling_count(dist.num_segments, dist.segment_size, mode) * len(dist.mass)


def relabeling_count(num_segments: int, segment_size: int, mode: str) -> int:
    count = math.factorial(segment_size) ** num_segments
    if mode == WITHIN_INTER:
        count *= math.factorial(num_segments)
    return count


def _slot_choices(num_segments: int, segment_size: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """One within-segment permutation per segment, in product order."""
    if num_segments == 0:
        yield ()
        return
    for head in itertools.permutations(range(segment_size)):
        for rest in _slot_choices(num_segments - 1, segment_size):
            yield (head,) + rest


def _relabelings(num_segments: int, segment_size: int, mode: str) -> Iterator[Tuple[int, ...]]:
    """Every global relabeling real index -> permuted index (0-based), generated lazily."""
    inter = (
        itertools.permutations(range(num_segments))
        if mode == WITHIN_INTER
        else [tuple(range(num_segments))]
    )
    for order in inter:
        for slots in _slot_choices(num_segments, segment_size):
            yield tuple(
                order[j] * segment_size + slots[j][i]
                for j in range(num_segments)
                for i in range(segment_size)
            )


def _statistic(subset: Iterable[int], dist: PatternDistribution, mode: str) -> Tuple[int, ...]:
    """What the closed form keeps of a 1-based index set: histogram or its multiset."""
    hist = histogram_of(subset, dist.num_subpackets, dist.num_segments)
    return hist.counts if mode == WITHIN else hist.multiset


def _joint_law(
    dist: PatternDistribution, mode: str, limit: Optional[int]
) -> Tuple[Dict[Tuple[frozenset, frozenset], Probability], Dict[frozenset, Probability]]:
    """Joint law of (X, Y) and the marginal of Y; Y holds 0-based permuted indices."""
    if mode not in MODES:
        raise InvalidParams(f"mode must be one of {MODES} (got {mode!r})")
    limit = get_settings().enumeration_limit if limit is None else limit
    size = enumeration_size(dist, mode)
    if size > limit:
        raise InfeasibleEnumeration(
            f"{size} enumerated pairs exceed the limit {limit} "
            f"(P={dist.num_subpackets}, B={dist.num_segments}, support={len(dist.mass)})"
        )

    count = relabeling_count(dist.num_segments, dist.segment_size, mode)
    share = Fraction(1, count) if dist.exact else 1.0 / count

    joint: Dict[Tuple[frozenset, frozenset], Probability] = defaultdict(int)
    for subset, p in dist.mass.items():
        images = Counter(
            frozenset(relabel[s - 1] for s in subset)
            for relabel in _relabelings(dist.num_segments, dist.segment_size, mode)
        )
        for y, hits in images.items():
            joint[(subset, y)] += p * share * hits

    p_y: Dict[frozenset, Probability] = defaultdict(int)
    for (_, y), p in joint.items():
        p_y[y] += p
    return joint, p_y


def brute_force_mi(
    dist: PatternDistribution,
    mode: str = WITHIN,
    limit: Optional[int] = None,
    base: float = 2,
) -> float:
    """
    I(X; Y) by exhaustive enumeration, Y being the permuted index set a database sees.

    The joint masses are exact rationals when the distribution is; only the
    final logarithms are taken in floating point.

    Raises:
        InvalidParams: If mode is unknown
        InfeasibleEnumeration: If more than ``limit`` pairs would be visited
    """
    joint, p_y = _joint_law(dist, mode, limit)

    keys = list(joint)
    pxy = np.array([float(joint[k]) for k in keys], dtype=np.float64)
    pxpy = np.array([float(dist.mass[x] * p_y[y]) for x, y in keys], dtype=np.float64)
    # p(x)p(y) is not normalized over the joint support
    mi = float(rel_entr(pxy, pxpy).sum() / math.log(base))

    logger.debug(
        "Brute-force mutual information",
        extra={"mode": mode, "pairs": enumeration_size(dist, mode), "joint_support": len(keys), "mi": mi},
    )
    return max(mi, 0.0)


def posterior_matches_closed_form(
    dist: PatternDistribution, mode: str = WITHIN, limit: Optional[int] = None
) -> bool:
    """
    Exact check of the enumerated joint law against the closed form.

    For every observed Y the posterior of X must be the prior restricted to
    the patterns sharing Y's histogram (multiset under WITHIN_INTER) and
    renormalized. Then I(X; Y) is exactly the entropy of that statistic.
    All comparisons are between rationals.

    Raises:
        InvalidParams: If the distribution carries float masses
    """
    if not dist.exact:
        raise InvalidParams("exact comparison needs rational pattern masses")
    joint, p_y = _joint_law(dist, mode, limit)

    statistic_mass: Dict[Tuple[int, ...], Probability] = defaultdict(int)
    members: Dict[Tuple[int, ...], List[frozenset]] = defaultdict(list)
    for x, p in dist.mass.items():
        if p:
            key = _statistic(x, dist, mode)
            statistic_mass[key] += p
            members[key].append(x)

    posteriors: Dict[frozenset, Dict[frozenset, Fraction]] = defaultdict(dict)
    for (x, y), p in joint.items():
        if p:
            posteriors[y][x] = p / p_y[y]

    for y, posterior in posteriors.items():
        key = _statistic([i + 1 for i in y], dist, mode)
        expected = {x: dist.mass[x] / statistic_mass[key] for x in members.get(key, [])}
        if posterior != expected:
            logger.warning(
                "Posterior differs from the closed-form class",
                extra={"mode": mode, "observed": sorted(y), "statistic": key},
            )
            return False
    return True


def uniform_histogram_mass(
    num_subpackets: int, num_segments: int, sparse_count: int
) -> Dict[Tuple[int, ...], Fraction]:
    """
    Exact histogram law of a uniformly random Pr-subset.

    P(x_1..x_B) = prod_i C(P/B, x_i) / C(P, Pr), computed over compositions
    instead of subsets.
    """
    check_segments(num_subpackets, num_segments)
    if not 1 <= sparse_count <= num_subpackets:
        raise InvalidParams(f"Pr={sparse_count} outside 1..{num_subpackets}")
    size = num_subpackets // num_segments
    total = math.comb(num_subpackets, sparse_count)
    return {
        counts: Fraction(math.prod(math.comb(size, c) for c in counts), total)
        for counts in compositions(sparse_count, num_segments, size)
    }


def compositions(total: int, parts: int, cap: int) -> Iterator[Tuple[int, ...]]:
    """Ordered ways to write total as parts nonnegative integers, each at most cap."""
    if parts == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap) + 1):
        for rest in compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def uniform_leakage(
    num_subpackets: int, num_segments: int, sparse_count: int, base: float = 2
) -> Tuple[float, float]:
    """(H_hat, H_tilde) for uniformly distributed sparse sets."""
    ordered = uniform_histogram_mass(num_subpackets, num_segments, sparse_count)
    multisets: Dict[Tuple[int, ...], Fraction] = defaultdict(Fraction)
    for counts, p in ordered.items():
        multisets[tuple(sorted(counts, reverse=True))] += p
    return entropy_bits(ordered.values(), base), entropy_bits(multisets.values(), base)


def leakage_curve(
    num_subpackets: int,
    sparse_count: int,
    segment_counts: Sequence[int],
    base: float = 2,
) -> List[LeakageRow]:
    """
    One (B, H_hat, H_tilde) row per segment count, for uniform sparse sets.

    Raises:
        InvalidB: If any B does not divide P
    """
    for b in segment_counts:
        check_segments(num_subpackets, b)
    rows = []
    for b in segment_counts:
        h_hat, h_tilde = uniform_leakage(num_subpackets, b, sparse_count, base)
        rows.append(LeakageRow(B=b, H_hat_bits=h_hat, H_tilde_bits=h_tilde))
    logger.info(
        "Leakage curve computed",
        extra={"P": num_subpackets, "Pr": sparse_count, "segment_counts": list(segment_counts)},
    )
    return rows


def choose_segment_count(
    case: Union[int, SchemeCase],
    num_subpackets: int,
    sparse_count: int,
    ell: int,
    epsilon: float,
) -> int:
    """
    Segment count B < P with the smallest storage among those leaking less than epsilon.

    Leakage is H_hat for cases 1/2 and H_tilde for cases 3/4 under uniform
    sparse sets; storage ties go to the smaller B. B = 1 never leaks, so a
    positive budget always has an answer.
    """
    case = as_case(case)
    if epsilon <= 0:
        raise InvalidParams(f"leakage budget must be positive (got {epsilon})")

    best: Optional[Tuple[int, int]] = None
    for b in range(1, num_subpackets):
        if num_subpackets % b:
            continue
        h_hat, h_tilde = uniform_leakage(num_subpackets, b, sparse_count)
        leakage = h_tilde if case.has_inter else h_hat
        if leakage >= epsilon:
            continue
        total = storage_counts(case, num_subpackets, b, ell).total
        if best is None or total < best[0]:
            best = (total, b)

    logger.info(
        "Segment count chosen",
        extra={"case": int(case), "P": num_subpackets, "epsilon": epsilon, "B": best[1]},
    )
    return best[1]


def write_leakage_csv(
    rows: Sequence[LeakageRow],
    path: Union[str, Path],
    provenance: Optional[Mapping[str, object]] = None,
) -> Path:
    """CSV with '#' provenance lines, the fixed header and 12 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        for key, value in (provenance or {}).items():
            handle.write(f"# {key}={value}\n")
        writer = csv.writer(handle)
        writer.writerow(["B", "H_hat_bits", "H_tilde_bits"])
        for row in rows:
            writer.writerow([row.B, f"{row.H_hat_bits:.12g}", f"{row.H_tilde_bits:.12g}"])
    logger.info("Leakage CSV written", extra={"path": str(path), "rows": len(rows)})
    return path
