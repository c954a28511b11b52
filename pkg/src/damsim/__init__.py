"""Link-level baseband simulator for delay-aligned single-carrier
transmission over sparse multipath channels with fractional path delays,
with a pulse-shaped CP multicarrier baseline."""

from .beamforming import (BeamformerSet, SubcarrierBeamformerSet, dam_beamformers,
                          frequency_domain_channel, mrt_beamformers,
                          ofdm_mrt_beamformers, rzf_beamformers, zf_beamformers)
from .channel import (AnalogGrid, DelayDecomposition, PathChannel, add_awgn,
                      apply_channel, decompose_delay, delay_grid,
                      generate_channel, load_channel, save_channel,
                      unit_noise_grid)
from .core import (SymbolStream, bits_per_symbol, constellation, detect_symbols,
                   make_rng, map_bits_to_symbols, random_bits, trial_seed)
from .dsp import (DiscreteSignal, FarrowFilter, PulseBank,
                  choose_upsampling_factor, design_pulse,
                  farrow_frequency_response, fractional_delay, matched_filter,
                  pulse_shape, upsample)
from .harness import (CampaignConfig, TrialResult, integer_delay_mode,
                      parse_config_text, run_campaign, run_papr_only,
                      validate_config)
from .metrics import (OverheadModel, SerEstimate, SinrBreakdown, ccdf_level,
                      dam_overhead, ideal_dam_snr, ofdm_overhead, papr,
                      papr_ccdf, pooled_ser, sinr_idam_analytic,
                      spectral_efficiency)
from .rx import (EmpiricalSinr, RxReport, SamplingSchedule, make_dam_schedule,
                 measure_sinr_empirical, ofdm_demodulate, ofdm_symbol_schedule,
                 receive_dam, receive_ofdm, sample_grid)
from .tx import (CompensationPlan, TxFrame, mean_tx_power, plan_fdam, plan_idam,
                 transmit_fdam, transmit_idam, transmit_ofdm)

__version__ = "0.1.0"
