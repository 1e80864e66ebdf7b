#pragma once

#include "ddsim/ambiguity.hpp"
#include "ddsim/channel.hpp"
#include "ddsim/equalization.hpp"
#include "ddsim/frame.hpp"
#include "ddsim/modulation.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ddsim {

/// Where the detector's channel knowledge comes from.
enum class EstimationMode {
    PilotBased,  ///< pilot frame then one data frame, overhead 1/2
    DataBased,   ///< pilot frame then F decision-directed data frames
    PerfectCsi,  ///< true effective taps, no pilot
};

std::string to_string(EstimationMode mode);
EstimationMode parse_mode(const std::string& name);

enum class PulseKind { Sinc, GaussianSinc };

/// Everything needed to run one sweep. Defaults mirror the Veh-A
/// evaluation setup: M=13, N=16, 30 kHz spacing at 2.4 GHz, 4-PSK.
struct ExperimentSpec {
    std::string name = "experiment";
    std::vector<SchemeTag> schemes{SchemeTag::ZakOTFS, SchemeTag::AFDM, SchemeTag::OTSM, SchemeTag::OFDM};
    std::vector<EstimationMode> modes{EstimationMode::PilotBased, EstimationMode::DataBased,
                                      EstimationMode::PerfectCsi};
    FrameConfig config{13, 16, 30e3, 2.4e9};
    AfdmParams afdm;
    int constellation_order = 4;
    std::vector<int> frames_per_pilot{3};  ///< F values (data-based mode)
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
    std::vector<double> nu_max{815.0};
    int trials = 2000;
    std::uint64_t seed = 1;
    PulseKind pulse = PulseKind::GaussianSinc;
    double pulse_beta = 0.0;  ///< 0 selects the default Gaussian-sinc width
    int guard = 3;       ///< extra bins around the spread for the true taps
    int mask_guard = 1;  ///< extra bins around the spread for the estimation mask
    std::optional<std::string> profile_path;  ///< defaults to Veh-A
    double evolution_c = kSpeedOfLight;
    QuadratureSpec quadrature;
    int pilot_index = -1;  ///< -1 selects the centre DD bin
    double tap_threshold = 0.0;
};

/// One point of the sweep grid.
struct Cell {
    SchemeTag scheme = SchemeTag::ZakOTFS;
    EstimationMode mode = EstimationMode::PilotBased;
    int frames = 1;  ///< F; 1 for the pilot-based baseline
    double snr_db = 0.0;
    double nu_max = 0.0;
};

/// Cells in deterministic order: scheme, mode, F, nu_max, snr.
std::vector<Cell> expand_cells(const ExperimentSpec& spec);

struct FrameStat {
    long bit_errors = 0;
    long bits = 0;
    double nmse = std::numeric_limits<double>::quiet_NaN();  ///< estimate made from this frame
    double tap_energy = 0.0;                                 ///< ground-truth sum |h|^2
};

struct TrialResult {
    std::vector<FrameStat> frames;  ///< data frames 1..F in order
    double pilot_nmse = std::numeric_limits<double>::quiet_NaN();

    long bit_errors() const;
    long bits() const;
    double ber() const;
};

/// Shared read-only state for all trials of a cell.
class CellContext {
public:
    CellContext(const ExperimentSpec& spec, const Cell& cell);

    const ExperimentSpec& spec() const { return *spec_; }
    const Cell& cell() const { return cell_; }
    const Basis& basis() const { return basis_; }
    const Constellation& constellation() const { return constellation_; }
    const PulseFilter& pulse() const { return pulse_; }
    const PowerDelayProfile& profile() const { return profile_; }
    int pilot_index() const { return pilot_index_; }

private:
    const ExperimentSpec* spec_;
    Cell cell_;
    Basis basis_;
    Constellation constellation_;
    PulseFilter pulse_;
    PowerDelayProfile profile_;
    int pilot_index_;
};

/// Runs one Monte-Carlo trial of the cell's frame pipeline. All randomness
/// comes from (spec.seed, trial_index, stream) so trials can run in any
/// order. Numerical failures are rethrown with the trial index attached.
TrialResult run_trial(const CellContext& ctx, std::uint64_t trial_index);

struct Feasibility {
    bool coherence_time_ok = false;       ///< delta_f >= 2 N nu_max
    bool coherence_bandwidth_ok = false;  ///< delta_f <= 1 / (M tau_max)
    double min_spacing = 0.0;             ///< 2 N nu_max (Hz)
    double max_spacing = 0.0;             ///< 1 / (M tau_max) (Hz), inf when tau_max = 0
    double spacing = 0.0;                 ///< delta_f (Hz)
    double doppler_margin = 0.0;          ///< delta_f - 2 N nu_max
    double delay_margin = 0.0;            ///< 1/(M tau_max) - delta_f

    bool pass() const { return coherence_time_ok && coherence_bandwidth_ok; }
};

Feasibility check_feasibility(const FrameConfig& cfg, double tau_max, double nu_max);

/// (1 - O)(1 - BER) MN log2|A| / (BT), bits/s/Hz.
double spectral_efficiency(double ber, double overhead, const FrameConfig& cfg, const Constellation& constellation);

/// Pilot overhead of a mode: 1/2 pilot-based, 1/(F+1) data-based, 0 perfect CSI.
double pilot_overhead(EstimationMode mode, int frames);

/// One output row. frame_index 0 means the aggregate over all data frames.
struct MetricRow {
    Cell cell;
    int frame_index = 0;
    int trials = 0;
    double ber = 0.0;
    double ber_ci = 0.0;  ///< 95% normal-approximation half-width over trials
    double nmse = std::numeric_limits<double>::quiet_NaN();
    double se = 0.0;
};

/// Reduce trial results (in trial order) to the "all frames" row followed
/// by one row per data frame. Throws ConfigError on empty input.
std::vector<MetricRow> aggregate(const std::vector<TrialResult>& results, const Cell& cell,
                                 const FrameConfig& cfg, const Constellation& constellation);

struct CellFailure {
    Cell cell;
    std::string message;
};

struct SweepResult {
    std::vector<MetricRow> rows;
    std::vector<CellFailure> failures;
};

using ProgressFn = std::function<void(const Cell&, std::size_t index, std::size_t total)>;

/// Runs every cell on a pool of `workers` threads (trials fan out; results
/// are reduced in trial order). A failing cell is recorded and skipped.
SweepResult run_sweep(const ExperimentSpec& spec, int workers, const ProgressFn& progress = {});

/// Runs the trials of a single cell and aggregates them.
std::vector<MetricRow> run_cell(const ExperimentSpec& spec, const Cell& cell, int workers);
std::vector<TrialResult> run_trials(const CellContext& ctx, int trials, int workers);

}  // namespace ddsim
