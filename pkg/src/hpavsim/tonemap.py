"""Tonemap data types and the closed-form link metrics computed from them.

A tonemap is the per-subcarrier modulation assignment (bits per OFDM symbol,
0-10) that a HomePlug AV receiver feeds back to a transmitter, one vector of
917 values per AC-line-cycle sub-interval ("slot"). Everything this library
computes - PHY rate, expected throughput, link asymmetry, spectrum fraction -
is a function of tonemaps:

    phy rate (slot k)     sum_j T[j] * C * (1 - B_err) / T_s
    expected throughput   (1 - F_o) * mean_k phy_rate(k)
    asymmetry(a<->b)      sum_k sum_j |T_ab[j] - T_ba[j]| / slot_count
    spectrum fraction     sum_{j in active} T[j] / 9170

All operations are pure; all types are immutable after construction.
Subcarrier and slot indices are 1-based in every public signature, matching
the trace file format.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

SUBCARRIER_COUNT = 917
MAX_MODULATION = 10
# Largest per-slot modulation total, and therefore the asymmetry bound and the
# spectrum-fraction denominator: 917 subcarriers * 10 bits.
MAX_MODULATION_TOTAL = SUBCARRIER_COUNT * MAX_MODULATION
MAX_SLOT_COUNT = 6
DEFAULT_SLOT_COUNT = 5

FEC_RATES = (Fraction(1, 2), Fraction(16, 21))


@dataclass(frozen=True)
class Tonemap:
    """Per-subcarrier modulation map for one directed link.

    ``slots[k-1][j-1]`` is the modulation of subcarrier ``j`` during AC-cycle
    sub-interval ``k``. Construction does not validate (so malformed maps can
    be represented and reported on); use :func:`validate_tonemap`.
    """

    slots: tuple

    def __init__(self, slots: Iterable[Iterable[int]]):
        object.__setattr__(self, "slots", tuple(tuple(s) for s in slots))

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def slot(self, k: int) -> tuple:
        """Modulation vector of 1-based slot ``k``."""
        if not 1 <= k <= len(self.slots):
            raise ValueError(f"slot index {k} out of range 1..{len(self.slots)}")
        return self.slots[k - 1]

    @classmethod
    def filled(cls, value: int, slot_count: int = DEFAULT_SLOT_COUNT) -> "Tonemap":
        """Map with every subcarrier of every slot at ``value``."""
        return cls(((value,) * SUBCARRIER_COUNT,) * slot_count)

    def __repr__(self) -> str:
        # the full 917-wide vectors are useless in tracebacks
        return f"Tonemap(slot_count={len(self.slots)})"


@dataclass(frozen=True, order=True)
class DirectedLink:
    """Transmitter/receiver pair identifying one direction of a PLC link."""

    tx: str
    rx: str

    def __post_init__(self):
        if self.tx == self.rx:
            raise ValueError(f"link endpoints must differ, got {self.tx!r} twice")

    def reversed(self) -> "DirectedLink":
        return DirectedLink(self.rx, self.tx)

    def __str__(self) -> str:
        return f"{self.tx}->{self.rx}"


@dataclass(frozen=True)
class PhyParams:
    """PHY constants entering the rate formulas.

    fec_rate          FEC code rate C; HPAV uses 1/2 or 16/21
    bit_error_rate    configured constant, not simulated (channel errors are
                      out of the simulation's scope)
    symbol_interval_us  OFDM symbol interval including overheads
    protocol_overhead   MAC/protocol overhead fraction applied to throughput
    """

    fec_rate: Fraction = Fraction(16, 21)
    bit_error_rate: float = 0.0
    symbol_interval_us: float = 46.0
    protocol_overhead: float = 0.4

    def __post_init__(self):
        if Fraction(self.fec_rate) not in FEC_RATES:
            raise ValueError(f"fec_rate must be one of {FEC_RATES}, got {self.fec_rate}")
        object.__setattr__(self, "fec_rate", Fraction(self.fec_rate))
        if not 0.0 <= self.bit_error_rate < 1.0:
            raise ValueError("bit_error_rate must be in [0, 1)")
        if self.symbol_interval_us <= 0:
            raise ValueError("symbol_interval_us must be positive")
        if not 0.0 <= self.protocol_overhead < 1.0:
            raise ValueError("protocol_overhead must be in [0, 1)")


def validate_tonemap(t: Tonemap) -> Optional[str]:
    """Return None if ``t`` satisfies all invariants, else the first violation.

    Scan order is: slot count, then per slot the subcarrier count, then each
    modulation value; messages carry the 1-based slot/subcarrier position.
    """
    if not 1 <= t.slot_count <= MAX_SLOT_COUNT:
        return f"slot count {t.slot_count} outside 1..{MAX_SLOT_COUNT}"
    for k, slot in enumerate(t.slots, start=1):
        if len(slot) != SUBCARRIER_COUNT:
            return (
                f"subcarrier count {len(slot)} in slot {k}, expected {SUBCARRIER_COUNT}"
            )
        for j, v in enumerate(slot, start=1):
            if not isinstance(v, int) or not 0 <= v <= MAX_MODULATION:
                return (
                    f"modulation out of range: value {v!r} at slot {k}, subcarrier {j}"
                )
    return None


def phy_rate(t: Tonemap, slot_index: int, params: PhyParams) -> float:
    """Effective PHY rate of one AC-cycle slot, in bits/second.

    sum of modulation bits per symbol, scaled by the FEC rate and the bit
    error rate, divided by the symbol interval (converted to seconds).
    """
    total_bits = sum(t.slot(slot_index))
    return float(
        total_bits
        * params.fec_rate
        * (1.0 - params.bit_error_rate)
        / (params.symbol_interval_us * 1e-6)
    )


def expected_throughput(t: Tonemap, params: PhyParams) -> float:
    """Protocol-level expected throughput in bits/second.

    The per-slot PHY rates are averaged over all AC-cycle slots and reduced
    by the protocol overhead fraction.
    """
    rates = [phy_rate(t, k, params) for k in range(1, t.slot_count + 1)]
    return (1.0 - params.protocol_overhead) * (sum(rates) / len(rates))


def asymmetry(t_ab: Tonemap, t_ba: Tonemap) -> Fraction:
    """Link asymmetry: summed per-subcarrier modulation distance, averaged
    over slots.

    Exact rational result in [0, 9170]; normalize by 9170 for the [0, 1]
    presentation scale. Symmetric in its arguments and zero iff the maps are
    identical.
    """
    if t_ab.slot_count != t_ba.slot_count:
        raise ValueError(
            f"slot_count mismatch: {t_ab.slot_count} vs {t_ba.slot_count}"
        )
    total = 0
    for slot_ab, slot_ba in zip(t_ab.slots, t_ba.slots):
        total += sum(abs(a - b) for a, b in zip(slot_ab, slot_ba))
    return Fraction(total, t_ab.slot_count)


def spectrum_fraction(t: Tonemap, slot_index: int, active_subcarriers) -> Fraction:
    """Fraction of the maximum modulation total carried by ``active_subcarriers``.

    ``active_subcarriers`` is any iterable of 1-based indices; the result is
    exact (a Fraction in [0, 1]) so that disjoint index sets add exactly.
    """
    slot = t.slot(slot_index)
    total = 0
    for j in active_subcarriers:
        if not 1 <= j <= SUBCARRIER_COUNT:
            raise ValueError(f"subcarrier index {j} out of range 1..{SUBCARRIER_COUNT}")
        total += slot[j - 1]
    return Fraction(total, MAX_MODULATION_TOTAL)
