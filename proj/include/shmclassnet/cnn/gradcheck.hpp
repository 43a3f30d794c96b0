#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmclassnet/cnn/train.hpp"

namespace shmclassnet::cnn {

/// One compared coordinate. `which` is "weight" or "bias".
struct GradCheckEntry {
    std::size_t layer = 0;
    std::string which;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    GradCheckEntry worst;
    std::vector<GradCheckEntry> violations;  // entries above tolerance
    bool passed() const { return violations.empty(); }
};

struct GradCheckOptions {
    double h = 1e-5;
    double tolerance = 1e-4;
    double denominator_floor = 1e-6;  // |a - n| / max(|a|, |n|, floor)
    std::size_t max_params = 0;       // 0 = all, otherwise a seeded random subsample
    std::uint64_t subsample_seed = 0;
    LossKind loss = LossKind::CrossEntropy;
};

/// Compares network_backward against central differences of the train-mode loss.
GradCheckReport grad_check(const NetworkSpec& spec, const NetworkParams& params,
                           const LabeledExample& example, const GradCheckOptions& opts = {});

}  // namespace shmclassnet::cnn
