#pragma once

#include "ddsim/frame.hpp"
#include "ddsim/modulation.hpp"

#include <string>
#include <vector>

namespace ddsim {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationOptions {
    FrameConfig config{13, 16, 30e3, 2.4e9};
    std::uint64_t seed = 1;
    int thumbtack_trials = 2000;
    int random_cases = 25;  ///< per scheme, for the twisted convolution and G s checks
    int max_roots_n = 64;
};

/// Gram deviation of every scheme below 1e-10.
std::vector<CheckResult> check_orthonormality(const FrameConfig& cfg);
/// A sign flip in one basis entry must be caught, with its (i, j) location.
CheckResult check_corrupted_basis(const FrameConfig& cfg);
/// ||A_{Hx,x} - h *sd A_x||_inf < 1e-10 for random taps and data frames.
std::vector<CheckResult> check_twisted_convolution(const FrameConfig& cfg, int cases, std::uint64_t seed);
/// ||apply_channel(h, Phi s) - G s|| / ||G s|| < 1e-10.
std::vector<CheckResult> check_system_equivalence(const FrameConfig& cfg, int cases, std::uint64_t seed);
/// Mean 4-PSK self-ambiguity: origin exactly 1 per frame, off-origin below
/// 3/sqrt(trials).
std::vector<CheckResult> check_thumbtack(const FrameConfig& cfg, int trials, std::uint64_t seed);
/// The off-origin bound must fail for the non-zero-mean alphabet {1, j}.
CheckResult check_thumbtack_negative_control(const FrameConfig& cfg, int trials, std::uint64_t seed);
/// sum_{n<N} e^{j2pi kn/N} = N 1{k = 0 mod N} for every N <= max_n and k in (-N, 2N).
CheckResult check_roots_of_unity(int max_n);

std::vector<CheckResult> run_validation(const ValidationOptions& options);

}  // namespace ddsim
