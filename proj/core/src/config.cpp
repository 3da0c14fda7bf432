#include "greg/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace greg {
namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

void set_stage_key(StageConfig& st, const std::string& key, const std::string& value) {
    if (key == "kind") {
        if (value == "plain") st.kind = LayerKind::plain;
        else if (value == "conv") st.kind = LayerKind::conv;
        else throw ConfigError("config: stage kind must be plain or conv");
    } else if (key == "iterations") {
        st.iterations = Index(parse_int(key, value));
    } else if (key == "step") {
        if (value == "fixed") st.step = StepPolicy::fixed;
        else if (value == "line_search") st.step = StepPolicy::line_search;
        else throw ConfigError("config: step must be fixed or line_search");
    } else if (key == "mu") {
        st.mu = parse_double(key, value);
    } else if (key == "alpha0") {
        st.alpha0 = parse_double(key, value);
    } else if (key == "alpha1") {
        st.alpha.assign(1, parse_double(key, value));
    } else if (key == "beta") {
        st.beta = parse_double(key, value);
    } else if (key == "update_head") {
        st.update_head = parse_bool(key, value);
    } else if (key == "window") {
        st.window = Index(parse_int(key, value));
    } else if (key == "conv_unit_norm") {
        st.conv_unit_norm = parse_bool(key, value);
    } else {
        throw ConfigError("config: unknown stage key '" + key + "'");
    }
}

void set_global_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "d") cfg.train.d = Index(parse_int(key, value));
    else if (key == "r") cfg.train.r = Index(parse_int(key, value));
    else if (key == "activation") cfg.train.activation = Activation::from_name(value).id;
    else if (key == "seed") cfg.train.seed = uint64_t(parse_int(key, value));
    else if (key == "minibatch") cfg.train.minibatch = Index(parse_int(key, value));
    else if (key == "workers") cfg.workers = int(parse_int(key, value));
    else if (key == "train_images") cfg.train_images = value;
    else if (key == "train_labels") cfg.train_labels = value;
    else if (key == "test_images") cfg.test_images = value;
    else if (key == "test_labels") cfg.test_labels = value;
    else if (key == "out") cfg.out = value;
    else if (key == "metrics") cfg.metrics = value;
    else throw ConfigError("config: unknown key '" + key + "'");
}

// Stages parse with an empty alpha list; give every stage its r mixing
// coefficients (default 0.98, the shared setting of the paper recipes).
void finalize(RunConfig& cfg) {
    for (StageConfig& st : cfg.train.stages)
        if (Index(st.alpha.size()) != cfg.train.r)
            st.alpha.resize(size_t(cfg.train.r), 0.98);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    cfg.train.stages.clear();
    StageConfig* current = nullptr;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line == "[stage]") {
            cfg.train.stages.push_back(StageConfig{});
            cfg.train.stages.back().alpha.clear();
            current = &cfg.train.stages.back();
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not a key = value pair");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " has an empty key or value");
        if (current)
            set_stage_key(*current, key, value);
        else
            set_global_key(cfg, key, value);
    }
    finalize(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key.rfind("stage", 0) == 0) {
        const size_t dot = key.find('.');
        if (dot != std::string::npos) {
            const std::string idx_str = key.substr(5, dot - 5);
            size_t pos = 0;
            unsigned long idx = 0;
            try {
                idx = std::stoul(idx_str, &pos);
            } catch (const std::exception&) {
                pos = std::string::npos;
            }
            if (pos != idx_str.size())
                throw ConfigError("config: bad stage index in '" + key + "'");
            if (idx >= cfg.train.stages.size())
                throw ConfigError("config: stage index out of range in '" + key + "'");
            set_stage_key(cfg.train.stages[idx], key.substr(dot + 1), value);
            if (Index(cfg.train.stages[idx].alpha.size()) != cfg.train.r)
                cfg.train.stages[idx].alpha.resize(size_t(cfg.train.r), 0.98);
            return;
        }
    }
    set_global_key(cfg, key, value);
}

std::vector<std::string> config_echo_lines(const RunConfig& cfg) {
    std::vector<std::string> lines;
    auto add = [&](const std::string& k, const std::string& v) {
        if (!v.empty()) lines.push_back(k + " = " + v);
    };
    add("d", std::to_string(cfg.train.d));
    add("r", std::to_string(cfg.train.r));
    add("activation", Activation::from_id(cfg.train.activation).name());
    add("seed", std::to_string(cfg.train.seed));
    add("minibatch", std::to_string(cfg.train.minibatch));
    add("train_images", cfg.train_images);
    add("train_labels", cfg.train_labels);
    add("test_images", cfg.test_images);
    add("test_labels", cfg.test_labels);
    add("out", cfg.out);
    add("metrics", cfg.metrics);
    char buf[64];
    for (size_t i = 0; i < cfg.train.stages.size(); ++i) {
        const StageConfig& st = cfg.train.stages[i];
        lines.push_back("[stage]  # " + std::to_string(i));
        add("kind", st.kind == LayerKind::conv ? "conv" : "plain");
        add("iterations", std::to_string(st.iterations));
        add("step", st.step == StepPolicy::fixed ? "fixed" : "line_search");
        if (st.step == StepPolicy::fixed) {
            std::snprintf(buf, sizeof buf, "%.17g", st.mu);
            add("mu", buf);
        }
        std::snprintf(buf, sizeof buf, "%.17g", st.alpha0);
        add("alpha0", buf);
        if (!st.alpha.empty()) {
            std::snprintf(buf, sizeof buf, "%.17g", st.alpha[0]);
            add("alpha1", buf);
        }
        std::snprintf(buf, sizeof buf, "%.17g", st.beta);
        add("beta", buf);
        add("update_head", st.update_head ? "true" : "false");
        if (st.kind == LayerKind::conv) {
            add("window", std::to_string(st.window));
            add("conv_unit_norm", st.conv_unit_norm ? "true" : "false");
        }
    }
    return lines;
}

}  // namespace greg
