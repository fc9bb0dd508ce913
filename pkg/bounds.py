"""
Certified bounds on the total variation distance between phi^k and the
canonical trace, density verdicts and cut-off window scans
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from config import DEFAULT_CAP
from errors import DomainError, LowerBoundRefused
from groups import enumerate_sphere, multiply, sphere_representative
from models.group import IDENTITY, FreeProduct, GroupElement, GroupModel
from models.results import (
    BoundResult,
    ClosedFormBound,
    CutoffWindow,
    DensityVerdict,
    LowerBound,
    Rigor,
    ScanResult,
    Verdict,
    VerificationCheck,
)
from models.state import DecayCertificate, DecayProfile, StateModel
from states import decay_profile


logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.01
DEFAULT_K_MAX = 64
DEFAULT_RADIUS = 8
CERTIFICATE_SLACK = 1e-12

MAX_CONSTANT_SCAN = 100_000
MAX_LOG = 700.0

Family = Callable[[int], tuple[GroupModel, StateModel]]


def certified_tail(size_S: int, certificate: DecayCertificate, k: int, radius: int) -> float:
    """
    Bounds sum_{i > R} |S| (|S|-1)^(i-1) (i+1)^(2kd) exp(-2k alpha i)

    With x = (|S|-1) exp(-2k alpha) the series is geometric when d = 0.
    Otherwise (i+1)^(2kd) <= C rho^i with rho = x^(-1/2), the geometric
    mean of 1 and 1/x, and C the maximum of (i+1)^(2kd) rho^(-i).

    Returns:
        float: The tail bound, or math.inf when no admissible rho exists
               or the bound does not fit in a float.
    """
    q = size_S - 1
    degree = 2 * k * certificate.poly_degree
    # Logs keep x = 1 exact for certificates sitting on the threshold
    log_x = math.log(q) - 2 * k * certificate.rate
    if log_x >= 0:
        return math.inf
    log_scale = math.log(size_S / q)
    if degree == 0:
        log_tail = log_scale + (radius + 1) * log_x - math.log(-math.expm1(log_x))
        return math.exp(log_tail) if log_tail < MAX_LOG else math.inf

    log_rho = -log_x / 2
    peak = degree / log_rho
    if peak <= MAX_CONSTANT_SCAN:
        log_constant = max(
            degree * math.log(i + 1) - i * log_rho for i in range(math.ceil(peak) + 2)
        )
    else:
        # (i+1)^D rho^(-i) peaks at i + 1 = D / ln rho over the reals
        log_constant = degree * math.log(peak) - degree + log_rho
    log_ratio = log_x / 2
    log_tail = (
        log_scale
        + log_constant
        + (radius + 1) * log_ratio
        - math.log(-math.expm1(log_ratio))
    )
    return math.exp(log_tail) if log_tail < MAX_LOG else math.inf


def certificate_gate(
    state: StateModel,
    radius: int = DEFAULT_RADIUS,
    cap: int = DEFAULT_CAP,
    slack: float = CERTIFICATE_SLACK,
) -> VerificationCheck:
    """
    Largest excess of |phi(g)| over the decay certificate on B(radius)

    A tail is only trusted after this passes. Radial states on models with
    closed-form spheres are checked on one representative per sphere.

    Raises:
        DomainError: If the state carries no certificate.
        CapacityError: If a sphere to enumerate has more than cap elements.
    """
    certificate = state.certificate
    if certificate is None:
        raise DomainError(f"{state} carries no decay certificate")
    model = state.model
    closed = model.closed_form_sphere_size(1) is not None
    excess = abs(state.evaluate(IDENTITY)) - certificate.bound(0)
    checked = 1
    for i in range(1, radius + 1):
        if state.radial and closed:
            layer = (sphere_representative(model, i),)
        else:
            layer = enumerate_sphere(model, i, cap)
        for g in layer:
            excess = max(excess, abs(state.evaluate(g)) - certificate.bound(i))
            checked += 1
    if excess > slack:
        logger.warning("%s exceeds its certificate by %.3e on B(%d)", state, excess, radius)
    return VerificationCheck("certificate", max(excess, 0.0), slack, checked)


def _truncated_sum(state: StateModel, k: int, radius: int, cap: int) -> float:
    model = state.model
    closed = model.closed_form_sphere_size(1) is not None
    terms = []
    for i in range(1, radius + 1):
        if state.radial and closed:
            representative = sphere_representative(model, i)
            weight = abs(state.evaluate(representative)) ** (2 * k)
            terms.append(model.closed_form_sphere_size(i) * weight)
        else:
            terms.extend(
                abs(state.evaluate(g)) ** (2 * k) for g in enumerate_sphere(model, i, cap)
            )
    return math.fsum(terms)


def l2_upper_bound(
    state: StateModel,
    k: int,
    radius: int = DEFAULT_RADIUS,
    cap: int = DEFAULT_CAP,
    check_certificate: bool = True,
) -> BoundResult:
    """
    Upper bound 1/2 sqrt(sum_{g != e} |phi(g)|^(2k)) on ||phi^k - delta_e||

    The sum is split into an exact part over 1 <= |g| <= R and a tail
    bounded through the decay certificate.

    Args:
        state (StateModel): phi, with its decay certificate.
        k (int): The power, at least 1.
        radius (int): Truncation radius R >= 1.
        cap (int): Enumeration cap for the exact part.
        check_certificate (bool): Run certificate_gate on B(radius) first;
                                  callers that already did pass False.

    Returns:
        BoundResult: Exact when the tail is the true remainder,
                     UpperCertified otherwise, Divergent when the
                     certificate does not make the series converge and
                     Unknown without a certificate or when the
                     certificate fails on B(radius).
    """
    if k < 1 or radius < 1:
        raise DomainError(f"Need k >= 1 and radius >= 1, got k={k}, radius={radius}")
    certificate = state.certificate
    if certificate is None:
        return BoundResult(math.nan, Rigor.UNKNOWN, radius)

    model = state.model
    tail = certified_tail(model.size_S, certificate, k, radius)
    if math.isinf(tail):
        logger.debug("k=%d: certificate %s does not converge", k, certificate)
        return BoundResult(math.inf, Rigor.DIVERGENT, radius, tail_bound=math.inf)
    if check_certificate and not certificate_gate(state, radius, cap).passed:
        return BoundResult(math.nan, Rigor.UNKNOWN, radius)

    truncated = _truncated_sum(state, k, radius, cap)
    exact = (
        state.tight
        and certificate.poly_degree == 0
        and model.closed_form_sphere_size(1) is not None
    )
    value = 0.5 * math.sqrt(truncated + tail)
    logger.debug("k=%d: truncated %.6g tail %.3g bound %.6g", k, truncated, tail, value)
    return BoundResult(
        value,
        Rigor.EXACT if exact else Rigor.UPPER_CERTIFIED,
        radius,
        truncated,
        tail,
    )


def closed_form_upper(size_S: int, alpha: float, c: float) -> ClosedFormBound:
    """
    Closed-form upper bound at k = ln(|S| - 1) / (2 alpha) + c

    Returns both the displayed form exp(-alpha c) / sqrt(2 - 2 exp(-alpha c))
    and the exact geometric sum sqrt(|S| / (4 (|S| - 1)) x / (1 - x)) with
    x = exp(-2 alpha c); the exact value is the one to rely on.
    """
    if size_S < 3 or not alpha > 0 or not c > 0:
        raise DomainError(
            f"Need |S| >= 3, alpha > 0 and c > 0, got {size_S}, {alpha}, {c}"
        )
    damped = math.exp(-alpha * c)
    displayed = damped / math.sqrt(2 - 2 * damped)
    x = math.exp(-2 * alpha * c)
    exact = math.sqrt(size_S / (4 * (size_S - 1)) * x / (1 - x))
    return ClosedFormBound(displayed, exact)


def upper_offset_constant(size_S: int, alpha: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """The offset c at which the exact closed-form upper bound equals epsilon"""
    y = 4 * (size_S - 1) * epsilon**2 / size_S
    x = y / (1 + y)
    return -math.log(x) / (2 * alpha)


def lower_offset_constant(epsilon: float = DEFAULT_EPSILON) -> float:
    """The offset c at which 8 exp(-2c) equals epsilon"""
    return math.log(8 / epsilon) / 2


def chebyshev_lower(mean_m: float, var_state: float, var_haar: float) -> float:
    if not mean_m > 0:
        raise DomainError(f"The Chebyshev bound needs a positive mean, got {mean_m}")
    return max(0.0, 1 - 4 * var_haar / mean_m**2 - 4 * var_state / mean_m**2)


def cogrowth_lower_bound(
    size_S: int,
    gamma: float,
    phi_plus_1: float,
    c: float,
    tolerance: float = 1e-12,
) -> float:
    """
    max(0, 1 - 4 (2 + 3 gamma^2 / |S|) exp(-2 phi+(1) c)), valid at
    k = ln(|S| - 1) / (2 phi+(1)) - c for states nonnegative on S
    """
    if gamma < math.sqrt(size_S - 1) - tolerance:
        raise DomainError(f"gamma = {gamma} is below sqrt(|S| - 1)")
    if not phi_plus_1 > 0 or not c > 0:
        raise DomainError(f"Need phi+(1) > 0 and c > 0, got {phi_plus_1}, {c}")
    return max(0.0, 1 - 4 * (2 + 3 * gamma**2 / size_S) * math.exp(-2 * phi_plus_1 * c))


def minimal_gen_lower_bound(
    size_S: int,
    phi_plus_1: float,
    c: float,
    profile: DecayProfile | None = None,
    minimal: bool = True,
    tolerance: float = 1e-12,
) -> float:
    """
    max(0, 1 - 8 exp(-2 phi+(1) c)) at k = ln(|S| - 1) / (2 phi+(1)) - c

    Raises:
        LowerBoundRefused: If the generating set is not minimal or the
                           profile shows phi-(2) < 2 phi+(1).
        DomainError: For |S| < 3, phi+(1) <= 0 or c <= 0.
    """
    if size_S < 3 or not phi_plus_1 > 0 or not c > 0:
        raise DomainError(
            f"Need |S| >= 3, phi+(1) > 0 and c > 0, got {size_S}, {phi_plus_1}, {c}"
        )
    if not minimal:
        raise LowerBoundRefused("The generating set is not minimal")
    if profile is not None and profile.minus(2) < 2 * profile.plus(1) - tolerance:
        raise LowerBoundRefused(
            f"phi-(2) = {profile.minus(2):.6g} is below 2 phi+(1) = {2 * profile.plus(1):.6g}"
        )
    return max(0.0, 1 - 8 * math.exp(-2 * phi_plus_1 * c))


def chi1_moments(state: StateModel, k: int) -> tuple[float, float]:
    """
    Mean phi^k(chi_1) and variance phi^k(chi_1^2) - phi^k(chi_1)^2, with
    chi_1^2 expanded over ordered pairs of generators grouped by product
    """
    model = state.model
    singles = [GroupElement((s,)) for s in model.generators]
    mean = math.fsum((state.evaluate(s) ** k).real for s in singles)
    products: dict[GroupElement, int] = {}
    for s in singles:
        for t in singles:
            g = multiply(model, s, t)
            products[g] = products.get(g, 0) + 1
    second = math.fsum(
        multiplicity * (state.evaluate(g) ** k).real for g, multiplicity in products.items()
    )
    return mean, second - mean**2


def predicted_location(size_S: int, phi_plus_1: float) -> float:
    """ln(|S| - 1) / (2 phi+(1)), infinite when phi does not decay on S"""
    if phi_plus_1 <= 0:
        return math.inf
    return math.log(size_S - 1) / (2 * phi_plus_1)


def best_lower_bound(
    state: StateModel,
    k: int,
    profile: DecayProfile | None = None,
    gamma: float | None = None,
    cap: int = DEFAULT_CAP,
) -> LowerBound | None:
    """
    Evaluates every lower bound that applies to phi^k and keeps the best

    The minimal generating set and cogrowth bounds apply to states that
    are nonnegative on S, at c = ln(|S| - 1) / (2 phi+(1)) - k > 0. The
    Chebyshev bound applies whenever phi^k(chi_1) > 0.

    Args:
        state (StateModel): phi.
        k (int): The power.
        profile (DecayProfile): A profile of radius >= 2, computed when
                                not given.
        gamma (float): Cogrowth of the marking. Defaults to sqrt(|S| - 1)
                       for free markings and to the upper bound |S| - 1
                       otherwise, which keeps the bound valid.

    Returns:
        LowerBound: The largest value with its kind, or None when no
                    bound applies.
    """
    model = state.model
    size_S = model.size_S
    q = size_S - 1
    if profile is None or profile.radius < 2:
        profile = decay_profile(state, 2, cap)
    phi_plus_1 = profile.plus(1)

    candidates: list[LowerBound] = []
    c = predicted_location(size_S, phi_plus_1) - k
    if state.nonnegative and size_S >= 3 and 0 < phi_plus_1 < math.inf and c > 0:
        try:
            value = minimal_gen_lower_bound(size_S, phi_plus_1, c, profile, model.minimal)
            candidates.append(LowerBound(value, "minimal_generating_set"))
        except LowerBoundRefused as error:
            logger.warning("Minimal generating set bound refused at k=%d: %s", k, error)
        if gamma is None:
            gamma = math.sqrt(q) if model.free_on_generators else float(q)
        candidates.append(
            LowerBound(cogrowth_lower_bound(size_S, gamma, phi_plus_1, c), "cogrowth")
        )

    mean, variance = chi1_moments(state, k)
    if mean > 0:
        candidates.append(
            LowerBound(chebyshev_lower(mean, max(variance, 0.0), float(size_S)), "chebyshev")
        )

    if not candidates:
        return None
    return max(candidates, key=lambda bound: bound.value)


def density_verdict(
    profile: DecayProfile,
    omega_estimate: float,
    k: int,
    nonnegative: bool = False,
) -> DensityVerdict:
    """
    Decides whether phi^k has an L2 density from the decay profile

    The liminf of phi-(i)/i and phi+(i)/i is approximated over the
    window ceil(R/2) <= i <= R and compared with ln(omega)/(2k).

    Returns:
        DensityVerdict: HasL2 when min phi-(i)/i clears the threshold,
                        NoL2 when max phi+(i)/i stays below it,
                        NotBoundedOnLGamma when only min phi+(i)/i is
                        below it for a nonnegative state on a group of
                        exponential growth, Inconclusive otherwise.
    """
    if profile.radius < 5:
        raise DomainError(f"Density verdicts need a profile of radius >= 5, got {profile.radius}")
    if k < 1:
        raise DomainError(f"Powers start at k = 1, got {k}")
    low, high = math.ceil(profile.radius / 2), profile.radius
    window = range(low, high + 1)
    threshold = math.log(omega_estimate) / (2 * k) if omega_estimate > 0 else -math.inf
    minus = min(profile.minus(i) / i for i in window)
    plus_high = max(profile.plus(i) / i for i in window)
    plus_low = min(profile.plus(i) / i for i in window)
    unbounded = nonnegative and omega_estimate > 1 and plus_low < threshold

    if minus > threshold:
        return DensityVerdict(Verdict.HAS_L2, minus - threshold, threshold, (low, high), unbounded)
    if plus_high < threshold:
        return DensityVerdict(Verdict.NO_L2, threshold - plus_high, threshold, (low, high), unbounded)
    if unbounded:
        return DensityVerdict(
            Verdict.NOT_BOUNDED, threshold - plus_low, threshold, (low, high), True
        )
    return DensityVerdict(Verdict.INCONCLUSIVE, 0.0, threshold, (low, high))


def free_product_window(size_S: int, alpha: float, beta: float) -> tuple[float, float]:
    """The window [ln sqrt|S| / beta, ln sqrt|S| / alpha] for free products"""
    if not 0 < alpha <= beta:
        raise DomainError(f"Need 0 < alpha <= beta, got {alpha}, {beta}")
    half_log = math.log(size_S) / 2
    return half_log / beta, half_log / alpha


def pure_radial_threshold(rank: int) -> float:
    """
    ln(|S| - 1) / (2 alpha) for the pure exponential certificate of
    radial states on Free(rank)

    (|g| + 1) (|S| - 1)^(-|g|/2) <= exp(-alpha |g|) with
    alpha = ln(|S| - 1) / 2 - ln 2, since |g| + 1 <= 2^|g|; alpha > 0
    needs |S| - 1 > 4, so rank >= 3.
    """
    if rank < 3:
        raise DomainError(f"The pure certificate needs rank >= 3, got {rank}")
    log_q = math.log(2 * rank - 1)
    return log_q / (log_q - 2 * math.log(2))


def _least_upper_k(state: StateModel, epsilon: float, k_max: int, radius: int, cap: int) -> int | None:
    def passes(k: int) -> bool:
        result = l2_upper_bound(state, k, radius, cap, check_certificate=False)
        return result.certified and result.value <= epsilon

    if not passes(k_max):
        return None
    low, high = 1, k_max
    while low < high:
        middle = (low + high) // 2
        if passes(middle):
            high = middle
        else:
            low = middle + 1
    return low


def _scan_member(
    family: Family,
    param: int,
    epsilon: float,
    k_max: int,
    radius: int,
    cap: int,
) -> CutoffWindow:
    model, state = family(param)
    logger.info("Scanning %s at parameter %d", model.name, param)
    profile = decay_profile(state, 2, cap)
    predicted = predicted_location(model.size_S, profile.plus(1))
    window = CutoffWindow(param, predicted, None, None)

    trusted = False
    if state.certificate is None:
        window.flags.append("no-certificate")
    elif not certificate_gate(state, radius, cap).passed:
        window.flags.append("certificate-failed")
    else:
        trusted = True
        window.k_upper = _least_upper_k(state, epsilon, k_max, radius, cap)
        if window.k_upper is None:
            window.flags.append("k-upper-beyond-k-max")

    last = window.k_upper or k_max
    for k in range(1, last + 1):
        bound = best_lower_bound(state, k, profile, cap=cap)
        if bound is None or bound.value < 1 - epsilon:
            break
        window.k_lower, window.lower_kind = k, bound.kind
    if window.k_lower is None:
        window.flags.append("no-lower-bound")

    if isinstance(model, FreeProduct) and trusted:
        alpha, beta = state.certificate.rate, profile.plus(1)
        if state.certificate.poly_degree == 0 and 0 < alpha <= beta < math.inf:
            window.window_low, window.window_high = free_product_window(
                model.size_S, alpha, beta
            )
    return window


def cutoff_scan(
    family: Family,
    params: Sequence[int],
    epsilon: float = DEFAULT_EPSILON,
    k_max: int = DEFAULT_K_MAX,
    radius: int = DEFAULT_RADIUS,
    threads: int = 1,
    cap: int = DEFAULT_CAP,
) -> ScanResult:
    """
    Locates the window between the last k with a certified lower bound
    >= 1 - epsilon and the first k with a certified upper bound <= epsilon,
    for every member of a family

    Members run on a thread pool; results keep the order of params.

    Returns:
        ScanResult: The windows and a summary. no_cutoff is set when
                    k_upper does not grow along the scanned parameters.
    """
    if not 0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    params = list(params)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        windows = list(
            pool.map(
                lambda param: _scan_member(family, param, epsilon, k_max, radius, cap),
                params,
            )
        )

    upper = [w.upper_offset for w in windows if w.upper_offset is not None and math.isfinite(w.upper_offset)]
    lower = [w.lower_offset for w in windows if w.lower_offset is not None and math.isfinite(w.lower_offset)]
    k_uppers = [w.k_upper for w in windows]
    no_cutoff = (
        len(k_uppers) >= 2
        and all(k is not None for k in k_uppers)
        and all(later <= earlier for earlier, later in zip(k_uppers, k_uppers[1:]))
    )
    return ScanResult(
        windows,
        max(upper) if upper else None,
        max(lower) if lower else None,
        no_cutoff,
    )
