"""Risk arithmetic for the predictions CSV.

Deliberately re-implemented rather than imported from the governor
package: the acceptance suite checks this route against the governor's
risk_score as two independent computations of the same formula
(0.6 * p_unsafe + 0.2 * confidence gap + 0.2 * dispersion, dispersion
around the uniform point with the K-1 denominator).
"""

ALPHA, BETA, GAMMA = 0.6, 0.2, 0.2


def risk_total(p_acceptable: float, p_unsafe: float) -> float:
    confidence_gap = 1.0 - (p_acceptable if p_acceptable >= p_unsafe else p_unsafe)
    dispersion = (p_acceptable - 0.5) ** 2 + (p_unsafe - 0.5) ** 2
    return ALPHA * p_unsafe + BETA * confidence_gap + GAMMA * dispersion
