#pragma once

#include "greg/checkpoint.hpp"
#include "greg/dataset.hpp"
#include "greg/model.hpp"
#include "greg/update.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace greg {

enum class StepPolicy : uint8_t { fixed, line_search };

struct StageConfig {
    LayerKind kind = LayerKind::plain;
    Index iterations = 300;
    StepPolicy step = StepPolicy::fixed;
    double mu = 0.06;               // fixed policy only
    double alpha0 = 0.98;           // mixes v0
    std::vector<double> alpha;      // alpha[k-1] mixes vk, one per fixed function
    double beta = 0.98;             // mixes e
    bool update_head = false;       // refit D, c after every iteration
    Index window = 5;               // conv stages
    bool conv_unit_norm = true;     // false: use the unnormalized projection
};

struct TrainConfig {
    Index d = 400;
    Index r = 1;  // fixed functions; only the raw input f^1(x) = x is defined
    ActivationId activation = ActivationId::tanh;
    std::vector<StageConfig> stages;
    Index minibatch = 0;  // 0 = full batch
    uint64_t seed = 1;
};

struct MetricsRow {
    Index iteration;  // global layer count; 0 is the pre-training baseline
    Index stage;      // -1 for the baseline row
    double mu;
    double train_mse;
    double train_acc;
    double test_acc;
    double wallclock_s;
};

struct StageReport {
    Index stage;
    Index iterations_run;
    std::string termination;  // "completed" or the early-stop reason
};

struct TrainResult {
    ModelState model;
    std::vector<MetricsRow> metrics;
    std::vector<StageReport> stage_reports;
};

struct EvalResult {
    double mse;
    double accuracy;
};

struct RunOptions {
    int workers = 1;
    std::ostream* log = nullptr;  // per-iteration progress lines
};

// Greedy stage-by-stage construction: each iteration computes the residual,
// the closed-form direction (conv-projected in conv stages), mixes it into
// the momentum state, steps the features, and appends the resulting layer.
// Momentum resets at stage boundaries. All reductions are blocked and
// deterministic, so results do not depend on the worker count.
TrainResult train(const Dataset& train_data, const Dataset& test_data,
                  const TrainConfig& cfg, const RunOptions& opts = {});

EvalResult evaluate(const ModelState& model, const Dataset& data, int workers = 1);

// Replaces dir.w0 by its convolution argmax and returns the kernel
// coefficients used; empty when the projection vanishes (dir stays dense).
std::optional<Vector> conv_project_direction(Direction& dir, const ConvStructure& s,
                                             bool unit_norm);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const std::vector<std::string>& header_comments = {});

}  // namespace greg
