"""
Entropy classification stage.

Samples the configured profile on a uniform grid of the Lagrangian domain,
classifies it (constant / exponential / power / generic), and checks every
tabulated generator against the determining relations.  A declared family or
exponent that disagrees with the classification fails the check.
"""

from typing import Any, Dict
import logging
import math

import numpy as np

from ..tools.entropy import EntropyProfile
from ..tools.symmetry import classify_entropy, determining_residuals, kernel_generators

logger = logging.getLogger(__name__)

Q_TOLERANCE = 1e-8


class ClassifyStage:

    def run(self, profile: EntropyProfile, gamma: float, xi_min: float, xi_max: float,
            samples: int, tol: float) -> Dict[str, Any]:
        xi = np.linspace(xi_min, xi_max, int(samples))
        result = classify_entropy(profile, xi, tol=tol, gamma=gamma)
        report = result.to_dict()

        problems = []
        if profile.family != "custom":
            if result.family != profile.family:
                problems.append(f"declared {profile.family}, classified {result.family}")
            elif profile.effective_q is not None and not math.isclose(
                    result.q, profile.effective_q, rel_tol=Q_TOLERANCE, abs_tol=Q_TOLERANCE):
                problems.append(f"declared q={profile.effective_q!r}, recovered q={result.q!r}")

        determining = [determining_residuals(g, profile, gamma, xi)
                       for g in kernel_generators() + result.extension]
        for row in determining:
            if not row["admitted"]:
                problems.append(f"{row['generator']} fails the determining relations")

        for p in problems:
            logger.error(f"Classification: {p}")
        logger.info(f"Classified {profile.label()} as {result.family}"
                    + (f" (q = {result.q:.12g})" if result.q is not None else ""))
        report.update({
            "profile": profile.describe(),
            "samples": int(samples),
            "tolerance": float(tol),
            "determining": determining,
            "problems": problems,
            "passed": not problems,
        })
        return report
