"""
Euler-Lagrange check stage
--------------------------
Samples admissible first-order jets and compares the coefficient vector of
(phi_tt, phi_txi, phi_xixi, S0') in the expanded Euler-Lagrange expression
with the coefficient vector of the main equation.  Also confirms that
accel() solves the main equation at random second-order jets.

Output schema:
    {
        "samples": 1000, "oracle": "finite-difference",
        "max_parallel_deviation": 3.2e-12, "tolerance": 1e-8,
        "max_relative_el_residual": 4.4e-16, "passed": true,
        "worst_jet": {"phi_t": ..., "phi_xi": ..., "S0": ...}
    }
"""

from typing import Any, Dict
import logging

import numpy as np

from ..tools.core import Jet2, accel, el_residual, parallel_deviation, quasilinear_coefficients, \
    variational_coefficients
from ..tools.entropy import EntropyProfile
from ..tools.symmetry import sample_jets

logger = logging.getLogger(__name__)


class ELCheckStage:
    """Variational-derivative equivalence on random jets."""

    def run(self, profile: EntropyProfile, gamma: float, samples: int, tol: float,
            rng: np.random.Generator, oracle: str = "finite-difference") -> Dict[str, Any]:
        jets = sample_jets(rng, samples, profile)
        S0, S0p, _, _ = (np.asarray(d) for d in profile.derivs(jets.xi))
        S0 = S0 * np.ones_like(jets.xi)
        S0p = S0p * np.ones_like(jets.xi)

        eq = np.stack(quasilinear_coefficients(jets.phi_t, jets.phi_xi, S0, gamma), axis=-1)
        el = np.stack(variational_coefficients(jets.phi_t, jets.phi_xi, S0, gamma, method=oracle), axis=-1)
        deviation = np.asarray(parallel_deviation(el, eq))
        worst = int(np.argmax(deviation))

        # jets where the phi_tt coefficient nearly vanishes (gamma > 2) are skipped
        ok = np.abs(eq[:, 0]) > 1e-8 * np.abs(eq).max(axis=-1)
        phi_txi = rng.normal(size=samples)[ok]
        phi_xixi = rng.normal(size=samples)[ok]
        v, p, S, Sp = jets.phi_t[ok], jets.phi_xi[ok], S0[ok], S0p[ok]
        phi_tt = np.asarray(accel(v, p, phi_txi, phi_xixi, S, Sp, gamma))
        jet2 = Jet2(xi=jets.xi[ok], t=jets.t[ok], phi=jets.phi[ok], phi_t=v, phi_xi=p,
                    phi_tt=phi_tt, phi_txi=phi_txi, phi_xixi=phi_xixi)
        residual = np.abs(np.asarray(el_residual(jet2, S, Sp, gamma)))
        terms = np.abs(eq[ok] * np.stack([phi_tt, phi_txi, phi_xixi, Sp], axis=-1)).max(axis=-1)
        rel = residual / np.where(terms > 0.0, terms, 1.0)

        max_dev = float(deviation[worst])
        passed = bool(max_dev <= tol)
        logger.info(f"Euler-Lagrange check ({oracle}): max deviation {max_dev:.3e} over {samples} jets "
                    f"(tol {tol:.1e}) -> {'pass' if passed else 'FAIL'}")
        return {
            "samples": int(samples),
            "oracle": oracle,
            "max_parallel_deviation": max_dev,
            "tolerance": float(tol),
            "max_relative_el_residual": float(rel.max()) if rel.size else 0.0,
            "passed": passed,
            "worst_jet": {
                "xi": float(jets.xi[worst]),
                "phi_t": float(jets.phi_t[worst]),
                "phi_xi": float(jets.phi_xi[worst]),
                "S0": float(S0[worst]),
            },
        }
