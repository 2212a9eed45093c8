"""Simulation laboratory for KLJN key exchange and the TherMod wireless variant."""

from kljnlab.noise import K_B, NoiseSpec, NoiseTrace, generate_trace, johnson_variance
from kljnlab.kljn import (
    BitState,
    Choice,
    DecodeError,
    ExchangeRecord,
    Level,
    ResistorPair,
    classify_loop_level,
    loop_signals,
    party_decode,
    run_bit_exchange,
)
from kljnlab.thermod import (
    AmplifierModel,
    CalibrationTable,
    ChannelModel,
    calibrate,
    transmit_bit,
    variance_threshold_decide,
)
from kljnlab.adversary import (
    AttackSummary,
    EveKljnGuess,
    kljn_eve_guess,
    run_kljn_key_attack,
    run_thermod_intercept,
)
from kljnlab.distill import (
    KeyMaterial,
    amplify,
    discard_non_secure,
    eve_prob_after_iteration,
    leakage_bits,
    xor_halve,
)
from kljnlab.errstat import BerCurvePoint, analytic_ber, monte_carlo_ber, required_samples
from kljnlab.power import (
    ComponentPower,
    NoSecureBitsError,
    PowerBudget,
    energy_per_final_bit,
    p_kljn,
    p_thermod,
)

__version__ = "0.1.0"
