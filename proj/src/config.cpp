#include "roadprop/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "roadprop/io.hpp"

namespace roadprop {

void Config::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(gsd_m > 0.0)) fail("gsd_m must be > 0");
    if (!(a1_m > 0.0)) fail("a1_m must be > 0");
    if (!(a1_m < a2_m)) fail("a1_m must be smaller than a2_m");
    if (slic_target < 1) fail("slic_target must be >= 1");
    if (!(slic_compactness > 0.0)) fail("slic_compactness must be > 0");
    if (hist_bins_h < 1) fail("hist_bins_h must be >= 1");
    if (hist_bins_s < 1) fail("hist_bins_s must be >= 1");
    if (!(pairwise_gamma >= 0.0)) fail("pairwise_gamma must be >= 0");
    if (!(pairwise_sigma > 0.0)) fail("pairwise_sigma must be > 0");
    if (!(kl_eps > 0.0)) fail("kl_eps must be > 0");
    if (!(sigma_rgb > 0.0)) fail("sigma_rgb must be > 0");
    if (!(sigma_xy > 0.0)) fail("sigma_xy must be > 0");
    if (!(alpha >= 0.0)) fail("alpha must be >= 0");
    if (!(beta >= 0.0)) fail("beta must be >= 0");
    if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must be in [0,1]");
    if (tile_size < 1) fail("tile_size must be >= 1");
}

PropagationConfig Config::propagation() const {
    PropagationConfig p;
    p.buffer = BufferParams{a1_m, a2_m, gsd_m};
    p.slic = SlicParams{slic_target, slic_compactness, 10};
    p.hist = HistogramSpec{hist_bins_h, hist_bins_s};
    p.pairwise_gamma = pairwise_gamma;
    p.pairwise_sigma = pairwise_sigma;
    p.kl_eps = kl_eps;
    p.tile_size = tile_size;
    return p;
}

KernelParams Config::kernel_params() const { return KernelParams{sigma_rgb, sigma_xy}; }

LossWeights Config::loss_weights() const { return LossWeights{alpha, beta}; }

namespace {

void assign_key(Config& cfg, const std::string& key, const std::string& value, int lineno) {
    auto bad_value = [&]() {
        throw ConfigError("config line " + std::to_string(lineno) + ": invalid value for " +
                          key + ": '" + value + "'");
    };
    auto as_double = [&]() {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            bad_value();
        }
        if (used != value.size() || !std::isfinite(v)) bad_value();
        return v;
    };
    auto as_int = [&]() {
        const double v = as_double();
        if (v != std::floor(v) || std::fabs(v) > 1e9) bad_value();
        return static_cast<int>(v);
    };

    static const std::map<std::string, std::function<void(Config&, double)>> doubles = {
        {"gsd_m", [](Config& c, double v) { c.gsd_m = v; }},
        {"a1_m", [](Config& c, double v) { c.a1_m = v; }},
        {"a2_m", [](Config& c, double v) { c.a2_m = v; }},
        {"slic_compactness", [](Config& c, double v) { c.slic_compactness = v; }},
        {"pairwise_gamma", [](Config& c, double v) { c.pairwise_gamma = v; }},
        {"pairwise_sigma", [](Config& c, double v) { c.pairwise_sigma = v; }},
        {"kl_eps", [](Config& c, double v) { c.kl_eps = v; }},
        {"sigma_rgb", [](Config& c, double v) { c.sigma_rgb = v; }},
        {"sigma_xy", [](Config& c, double v) { c.sigma_xy = v; }},
        {"alpha", [](Config& c, double v) { c.alpha = v; }},
        {"beta", [](Config& c, double v) { c.beta = v; }},
        {"threshold", [](Config& c, double v) { c.threshold = v; }},
    };
    static const std::map<std::string, std::function<void(Config&, int)>> ints = {
        {"slic_target", [](Config& c, int v) { c.slic_target = v; }},
        {"hist_bins_h", [](Config& c, int v) { c.hist_bins_h = v; }},
        {"hist_bins_s", [](Config& c, int v) { c.hist_bins_s = v; }},
        {"tile_size", [](Config& c, int v) { c.tile_size = v; }},
    };

    if (const auto it = doubles.find(key); it != doubles.end()) {
        it->second(cfg, as_double());
    } else if (const auto it2 = ints.find(key); it2 != ints.end()) {
        it2->second(cfg, as_int());
    } else {
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                          "'");
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        assign_key(cfg, key, value, lineno);
    }
    cfg.validate();
    return cfg;
}

Config parse_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace roadprop
