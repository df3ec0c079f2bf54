"""
Sufficient conditions for exponential consensus, checked one by one with evidence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from syncindex.design import GainDesign
from syncindex.graph import (
    GraphSignal, PrecompactnessReport, WindowReport, check_joint_connectivity, find_min_window,
    is_jointly_connected, validate_precompactness,
)
from syncindex.lti import ModeReport, Plant, is_controllable, pbh_modes, spectrum_in_closed_rhp

logger = logging.getLogger(__name__)


@dataclass
class Theorem4Checklist:
    """
    Controllability, closed right half-plane spectrum, precompactness, joint
    (delta, T)-connectivity and a synchronization index of at least 1.
    ``overall`` is their conjunction. The remaining fields hold the evidence.
    """
    controllable: bool
    spectrum_rhp: bool
    precompact_certified: bool
    jointly_connected: bool
    delta: float
    T: float
    sync_index: Optional[float]
    index_ok: bool
    eigenvalues: np.ndarray = field(repr=False, default=None)
    modes: List[ModeReport] = field(repr=False, default_factory=list)
    precompactness: PrecompactnessReport = field(repr=False, default=None)
    windows: List[WindowReport] = field(repr=False, default_factory=list)
    min_window: Optional[float] = None
    design: GainDesign = field(repr=False, default=None)

    @property
    def overall(self) -> bool:
        return all((self.controllable, self.spectrum_rhp, self.precompact_certified, self.jointly_connected, self.index_ok))

    @property
    def failing_windows(self) -> List[WindowReport]:
        return [window for window in self.windows if not window.connected]

    @property
    def uncontrollable_modes(self) -> List[ModeReport]:
        return [mode for mode in self.modes if not mode.controllable]

    def flags(self) -> dict:
        return {
            "controllable": self.controllable,
            "spectrum_rhp": self.spectrum_rhp,
            "precompact_certified": self.precompact_certified,
            "jointly_connected": self.jointly_connected,
            "index_ok": self.index_ok,
            "overall": self.overall,
        }


def theorem4_checklist(
    p: Plant,
    g: GraphSignal,
    design: GainDesign,
    delta: float,
    T: float,
    horizon: float,
    stride: float = None,
    c: float = None,
    c_hat: float = None,
) -> Theorem4Checklist:
    """
    Runs every check and records the evidence. Failed conditions are reported, never raised.

    :param horizon: Span the graph conditions are certified on.
    """
    windows = check_joint_connectivity(g, delta, T, horizon, stride)
    jointly_connected = is_jointly_connected(windows)
    checklist = Theorem4Checklist(
        controllable=is_controllable(p),
        spectrum_rhp=spectrum_in_closed_rhp(p.A),
        precompact_certified=False,
        jointly_connected=jointly_connected,
        delta=delta,
        T=T,
        sync_index=design.sync_index,
        index_ok=design.index_ok,
        eigenvalues=p.eigenvalues,
        modes=pbh_modes(p),
        windows=windows,
        design=design,
    )
    checklist.precompactness = validate_precompactness(g, horizon, c, c_hat)
    checklist.precompact_certified = checklist.precompactness.valid
    if jointly_connected:
        checklist.min_window = find_min_window(g, delta, T, horizon, stride)
    logger.info(f"Checklist: {checklist.flags()}")
    return checklist
