"""
Consensus certification from simulated data.
"""

from syncindex.analyze.verdict import (
    RateFit, GuecVerdict, DecayConsistency, window_alpha_integrals, fit_exponential_rate, restart_rates,
    is_uniform, classify, guec_verdict, decay_constants, decay_consistency,
)
from syncindex.analyze.checklist import Theorem4Checklist, theorem4_checklist
from syncindex.analyze.witness import WitnessReport, uncontrollable_witness_report, scaled_witness
