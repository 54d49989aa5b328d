#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "roadprop/losses.hpp"
#include "roadprop/propagate.hpp"

namespace roadprop {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value configuration shared by every subcommand. Missing keys
// take the defaults below; unknown keys are rejected.
struct Config {
    double gsd_m = 1.2;
    double a1_m = 6.0;
    double a2_m = 18.0;
    int slic_target = 400;
    double slic_compactness = 20.0;
    int hist_bins_h = 20;
    int hist_bins_s = 20;
    double pairwise_gamma = 1.0;
    double pairwise_sigma = 1.0;
    double kl_eps = 1e-8;
    double sigma_rgb = 15.0;
    double sigma_xy = 100.0;
    double alpha = 0.5;
    double beta = 0.7;
    double threshold = 0.5;
    int tile_size = 512;

    void validate() const;  // throws ConfigError naming the offending key

    PropagationConfig propagation() const;
    KernelParams kernel_params() const;
    LossWeights loss_weights() const;
};

// One "key = value" pair per line; '#' starts a comment; blank lines are
// skipped.
Config parse_config(const std::filesystem::path& path);
Config parse_config_text(const std::string& text);

}  // namespace roadprop
