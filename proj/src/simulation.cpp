#include "ddsim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace ddsim {

std::string to_string(EstimationMode mode) {
    switch (mode) {
        case EstimationMode::PilotBased: return "pilot";
        case EstimationMode::DataBased: return "data";
        case EstimationMode::PerfectCsi: return "perfect";
    }
    return "?";
}

EstimationMode parse_mode(const std::string& name) {
    std::string key;
    for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "pilot" || key == "pilot-based") return EstimationMode::PilotBased;
    if (key == "data" || key == "data-based") return EstimationMode::DataBased;
    if (key == "perfect" || key == "perfect-csi") return EstimationMode::PerfectCsi;
    throw ConfigError("unknown estimation mode: " + name);
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
    std::vector<Cell> cells;
    for (SchemeTag scheme : spec.schemes) {
        for (EstimationMode mode : spec.modes) {
            std::vector<int> frames{1};
            if (mode != EstimationMode::PilotBased) frames = spec.frames_per_pilot;
            for (int f : frames) {
                for (double nu : spec.nu_max) {
                    for (double snr : spec.snr_db) cells.push_back(Cell{scheme, mode, f, snr, nu});
                }
            }
        }
    }
    return cells;
}

long TrialResult::bit_errors() const {
    long e = 0;
    for (const auto& f : frames) e += f.bit_errors;
    return e;
}

long TrialResult::bits() const {
    long b = 0;
    for (const auto& f : frames) b += f.bits;
    return b;
}

double TrialResult::ber() const {
    const long b = bits();
    return b > 0 ? static_cast<double>(bit_errors()) / static_cast<double>(b) : 0.0;
}

namespace {

PulseFilter make_pulse(const ExperimentSpec& spec) {
    return spec.pulse == PulseKind::Sinc ? PulseFilter::sinc() : PulseFilter::gaussian_sinc(spec.pulse_beta);
}

PowerDelayProfile make_profile(const ExperimentSpec& spec) {
    return spec.profile_path ? PowerDelayProfile::load(*spec.profile_path) : PowerDelayProfile::veh_a();
}

// Unset AFDM coefficients follow the estimation mask's Doppler half-width.
AfdmParams resolve_afdm(const ExperimentSpec& spec, const Cell& cell) {
    const DDBox box = DDBox::for_spread(spec.config, 0.0, cell.nu_max, spec.mask_guard);
    const AfdmParams fit = AfdmParams::for_doppler_span(spec.config, box.l_hi);
    return AfdmParams{spec.afdm.c1 ? spec.afdm.c1 : fit.c1, spec.afdm.c2 ? spec.afdm.c2 : fit.c2};
}

}  // namespace

CellContext::CellContext(const ExperimentSpec& spec, const Cell& cell)
    : spec_(&spec),
      cell_(cell),
      basis_(BasisScheme{cell.scheme, spec.config, resolve_afdm(spec, cell)}),
      constellation_(Constellation::psk(spec.constellation_order)),
      pulse_(make_pulse(spec)),
      profile_(make_profile(spec)),
      pilot_index_(spec.pilot_index >= 0 ? spec.pilot_index : basis_.default_pilot_index()) {
    if (pilot_index_ >= basis_.mn()) throw ConfigError("pilot index out of range");
    if (cell.frames < 1) throw ConfigError("F must be at least 1");
    if (constellation_.bits_per_symbol() == 0) throw ConfigError("constellation order must be a power of two");
}

namespace {

// Channel knowledge handed from one frame to the detector of the next.
struct ChannelKnowledge {
    DDTaps taps;         // DD estimate (or truth)
    CVector transfer;    // OFDM one-tap diagonal
};

class TrialRunner {
public:
    TrialRunner(const CellContext& ctx, std::uint64_t trial)
        : ctx_(ctx),
          trial_(trial),
          cfg_(ctx.spec().config),
          seed_{ctx.spec().seed},
          sigma2_(noise_variance(ctx.cell().snr_db)),
          ofdm_(ctx.cell().scheme == SchemeTag::OFDM) {
        auto rng = seed_.engine(trial_, stream_tag(Stream::Channel));
        paths_ = draw_paths(ctx.profile(), rng, ctx.cell().nu_max);
        truth_box_ = DDBox::for_spread(cfg_, paths_.tau_max, ctx.cell().nu_max, ctx.spec().guard);
        mask_ = DDBox::for_spread(cfg_, paths_.tau_max, ctx.cell().nu_max, ctx.spec().mask_guard);
    }

    TrialResult run() {
        switch (ctx_.cell().mode) {
            case EstimationMode::PerfectCsi: return run_perfect();
            case EstimationMode::PilotBased: return run_decision_chain(1, false);
            case EstimationMode::DataBased: return run_decision_chain(ctx_.cell().frames, true);
        }
        return {};
    }

private:
    DDTaps truth(int frame) const {
        return effective_taps(ctx_.pulse(), evolve(paths_, frame, cfg_, ctx_.spec().evolution_c), cfg_,
                              truth_box_, ctx_.spec().quadrature);
    }

    SampleFrame receive(const DDTaps& taps, const SampleFrame& x, int frame) const {
        auto rng = seed_.engine(trial_, stream_tag(Stream::Noise, static_cast<std::uint32_t>(frame)));
        return apply_channel(taps, x, rng, ctx_.cell().snr_db);
    }

    struct DataFrame {
        BitVector bits;
        SymbolFrame symbols;
        SampleFrame y;
    };

    DataFrame transmit_data(const DDTaps& taps, int frame) const {
        auto rng = seed_.engine(trial_, stream_tag(Stream::DataBits, static_cast<std::uint32_t>(frame)));
        DataFrame d;
        d.bits = random_bits(static_cast<std::size_t>(cfg_.mn()) * ctx_.constellation().bits_per_symbol(), rng);
        d.symbols = map_bits(d.bits, ctx_.constellation());
        d.y = receive(taps, ctx_.basis().modulate(d.symbols), frame);
        return d;
    }

    SliceResult detect(const ChannelKnowledge& known, const SampleFrame& y) const {
        if (ofdm_) return slice(ofdm_one_tap_equalize(ctx_.basis(), y, known.transfer, sigma2_), ctx_.constellation());
        return DDEqualizer(known.taps, ctx_.basis(), sigma2_).detect(y, ctx_.constellation());
    }

    static FrameStat score(const BitVector& sent, const BitVector& decided) {
        FrameStat s;
        s.bits = static_cast<long>(sent.size());
        for (std::size_t i = 0; i < sent.size(); ++i) s.bit_errors += sent[i] != decided[i];
        return s;
    }

    TrialResult run_perfect() {
        TrialResult result;
        for (int f = 1; f <= ctx_.cell().frames; ++f) {
            const DDTaps h = truth(f);
            ChannelKnowledge known{h, ofdm_ ? ofdm_transfer_diagonal(h, ctx_.basis()) : CVector{}};
            const DataFrame d = transmit_data(h, f);
            FrameStat stat = score(d.bits, detect(known, d.y).bits);
            stat.tap_energy = h.energy();
            result.frames.push_back(stat);
        }
        return result;
    }

    // Pilot at frame 0, then `frames` data frames; each detection uses the
    // estimate from the previous frame. With `reestimate` false the chain
    // stops after one data frame.
    TrialResult run_decision_chain(int frames, bool reestimate) {
        TrialResult result;
        const Basis& basis = ctx_.basis();
        const int mn = cfg_.mn();

        const DDTaps h0 = truth(0);
        SymbolFrame pilot_symbols;
        SampleFrame x_pilot;
        if (ofdm_) {
            auto rng = seed_.engine(trial_, stream_tag(Stream::Pilot));
            pilot_symbols = random_symbols(mn, ctx_.constellation(), rng);
            x_pilot = basis.modulate(pilot_symbols);
        } else {
            // Single basis element scaled to the same frame energy as data.
            x_pilot = basis.synthesis().col(ctx_.pilot_index()) * std::sqrt(static_cast<double>(mn));
        }
        const SampleFrame y_pilot = receive(h0, x_pilot, 0);
        const EstimatorOptions opts{ctx_.spec().tap_threshold};
        ChannelKnowledge known{estimate_taps(y_pilot, x_pilot, mask_, opts), CVector{}};
        if (ofdm_) known.transfer = ofdm_transfer_estimate(basis, pilot_symbols, y_pilot);
        result.pilot_nmse = nmse(known.taps, h0);

        for (int f = 1; f <= frames; ++f) {
            const DDTaps h = truth(f);
            const DataFrame d = transmit_data(h, f);
            const SliceResult decided = detect(known, d.y);
            FrameStat stat = score(d.bits, decided.bits);
            stat.tap_energy = h.energy();
            if (reestimate) {
                const SampleFrame x_hat = basis.modulate(decided.symbols);
                known.taps = estimate_taps(d.y, x_hat, mask_, opts);
                if (ofdm_) known.transfer = ofdm_transfer_estimate(basis, decided.symbols, d.y);
                stat.nmse = nmse(known.taps, h);
            } else {
                stat.nmse = result.pilot_nmse;
            }
            result.frames.push_back(stat);
        }
        return result;
    }

    const CellContext& ctx_;
    std::uint64_t trial_;
    FrameConfig cfg_;
    SeedSpec seed_;
    double sigma2_;
    bool ofdm_;
    PathSet paths_;
    DDBox truth_box_;
    DDBox mask_;
};

}  // namespace

TrialResult run_trial(const CellContext& ctx, std::uint64_t trial_index) {
    try {
        return TrialRunner(ctx, trial_index).run();
    } catch (const NumericalError& e) {
        throw NumericalError("trial " + std::to_string(trial_index) + ": " + e.what());
    }
}

Feasibility check_feasibility(const FrameConfig& cfg, double tau_max, double nu_max) {
    Feasibility f;
    f.spacing = cfg.delta_f;
    f.min_spacing = 2.0 * cfg.N * nu_max;
    f.max_spacing = tau_max > 0.0 ? 1.0 / (cfg.M * tau_max) : std::numeric_limits<double>::infinity();
    f.doppler_margin = f.spacing - f.min_spacing;
    f.delay_margin = f.max_spacing - f.spacing;
    f.coherence_time_ok = f.spacing >= f.min_spacing;
    f.coherence_bandwidth_ok = f.spacing <= f.max_spacing;
    return f;
}

double spectral_efficiency(double ber, double overhead, const FrameConfig& cfg, const Constellation& constellation) {
    if (ber < 0.0 || ber > 1.0) throw ConfigError("BER must lie in [0, 1]");
    if (overhead < 0.0 || overhead >= 1.0) throw ConfigError("pilot overhead must lie in [0, 1)");
    const double bt = cfg.bandwidth() * cfg.duration();
    return (1.0 - overhead) * (1.0 - ber) * cfg.mn() * std::log2(static_cast<double>(constellation.order())) / bt;
}

double pilot_overhead(EstimationMode mode, int frames) {
    switch (mode) {
        case EstimationMode::PilotBased: return 0.5;
        case EstimationMode::DataBased: return 1.0 / (frames + 1.0);
        case EstimationMode::PerfectCsi: return 0.0;
    }
    return 0.0;
}

namespace {

struct RunningStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    int count = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    double mean() const { return count ? sum / count : 0.0; }
    double ci95() const {
        if (count < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
        return 1.96 * std::sqrt(var / count);
    }
};

MetricRow make_row(const Cell& cell, int frame_index, const RunningStats& ber, double nmse_sum, int nmse_count,
                   const FrameConfig& cfg, const Constellation& constellation) {
    MetricRow row;
    row.cell = cell;
    row.frame_index = frame_index;
    row.trials = ber.count;
    row.ber = ber.mean();
    row.ber_ci = ber.ci95();
    row.nmse = nmse_count > 0 ? nmse_sum / nmse_count : std::numeric_limits<double>::quiet_NaN();
    row.se = spectral_efficiency(row.ber, pilot_overhead(cell.mode, cell.frames), cfg, constellation);
    return row;
}

}  // namespace

std::vector<MetricRow> aggregate(const std::vector<TrialResult>& results, const Cell& cell, const FrameConfig& cfg,
                                 const Constellation& constellation) {
    if (results.empty()) throw ConfigError("aggregate needs at least one trial result");
    const std::size_t frames = results.front().frames.size();

    RunningStats all;
    double all_nmse = 0.0;
    int all_nmse_count = 0;
    std::vector<RunningStats> per_frame(frames);
    std::vector<double> frame_nmse(frames, 0.0);
    std::vector<int> frame_nmse_count(frames, 0);

    for (const auto& r : results) {
        if (r.frames.size() != frames) throw ConfigError("trial results disagree on frame count");
        all.add(r.ber());
        for (std::size_t f = 0; f < frames; ++f) {
            const auto& s = r.frames[f];
            per_frame[f].add(s.bits > 0 ? static_cast<double>(s.bit_errors) / s.bits : 0.0);
            if (std::isfinite(s.nmse)) {
                frame_nmse[f] += s.nmse;
                ++frame_nmse_count[f];
                all_nmse += s.nmse;
                ++all_nmse_count;
            }
        }
    }

    std::vector<MetricRow> rows;
    rows.push_back(make_row(cell, 0, all, all_nmse, all_nmse_count, cfg, constellation));
    for (std::size_t f = 0; f < frames; ++f) {
        rows.push_back(make_row(cell, static_cast<int>(f + 1), per_frame[f], frame_nmse[f], frame_nmse_count[f], cfg,
                                constellation));
    }
    return rows;
}

std::vector<TrialResult> run_trials(const CellContext& ctx, int trials, int workers) {
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    workers = std::clamp(workers, 1, std::max(1, trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (int t = next++; t < trials; t = next++) {
            try {
                results[t] = run_trial(ctx, static_cast<std::uint64_t>(t));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = trials;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::vector<MetricRow> run_cell(const ExperimentSpec& spec, const Cell& cell, int workers) {
    const CellContext ctx(spec, cell);
    return aggregate(run_trials(ctx, spec.trials, workers), cell, spec.config, ctx.constellation());
}

SweepResult run_sweep(const ExperimentSpec& spec, int workers, const ProgressFn& progress) {
    SweepResult out;
    const auto cells = expand_cells(spec);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (progress) progress(cells[i], i, cells.size());
        try {
            auto rows = run_cell(spec, cells[i], workers);
            out.rows.insert(out.rows.end(), rows.begin(), rows.end());
        } catch (const std::exception& e) {
            out.failures.push_back(CellFailure{cells[i], e.what()});
        }
    }
    return out;
}

}  // namespace ddsim
