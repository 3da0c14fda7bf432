#pragma once

#include "greg/trainer.hpp"

#include <string>
#include <vector>

namespace greg {

// Everything a training run needs: the TrainConfig plus file locations and
// the parallel width. Populated from a config file, then overridden by CLI
// flags and --set key=value pairs (last writer wins).
struct RunConfig {
    TrainConfig train;
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::string out;
    std::string metrics;
    int workers = 0;  // 0 = one per hardware thread
};

// Flat key = value lines; a [stage] header opens the next stage section.
// '#' starts a comment. Global keys: d, r, activation, seed, minibatch,
// workers, train_images, train_labels, test_images, test_labels, out,
// metrics. Stage keys: kind, iterations, step, mu, alpha0, alpha1, beta,
// update_head, window, conv_unit_norm.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// key or stage<N>.key assignment, same names as the file format.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// The effective configuration, one "key = value" line each, suitable for
// echoing into the metrics header.
std::vector<std::string> config_echo_lines(const RunConfig& cfg);

}  // namespace greg
