#include "msbaco/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace msbaco {

namespace {

std::string_view strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Removes a trailing comment that is not inside a quoted string.
std::string_view drop_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool is_quoted(std::string_view v) { return v.size() >= 2 && v.front() == '"' && v.back() == '"'; }

std::string unquote(std::string_view v) {
    if (is_quoted(v)) return std::string(v.substr(1, v.size() - 2));
    return std::string(v);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    std::string cleaned;
    for (char c : text)
        if (c != '_') cleaned.push_back(c);
    T value{};
    const char* first = cleaned.data();
    const char* last = first + cleaned.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError("invalid boolean '" + std::string(text) + "' for key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dataset", "label_column", "header", "n_init", "learning_rate", "e_bet", "patience",
        "max_epochs", "max_iterations", "heuristic", "alpha", "beta", "rho", "ants", "generations",
        "tau0", "efast_interference", "efast_samples", "efast_focal_frequency", "seed"};
    return keys;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view raw,
                   const std::filesystem::path& base_dir) {
    const std::string_view value = strip(raw);
    if (value.empty()) throw ConfigError("empty value for key '" + std::string(key) + "'");

    if (key == "dataset") {
        std::filesystem::path p = unquote(value);
        cfg.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (key == "label_column") {
        if (is_quoted(value)) {
            cfg.label_column = unquote(value);
        } else {
            cfg.label_column = parse_number<int>(key, value);
        }
    } else if (key == "header") {
        cfg.has_header = parse_bool(key, value);
    } else if (key == "n_init") {
        cfg.n_init = parse_number<std::size_t>(key, value);
    } else if (key == "learning_rate") {
        cfg.learning_rate = parse_number<double>(key, value);
    } else if (key == "e_bet") {
        cfg.e_bet = parse_number<int>(key, value);
    } else if (key == "patience") {
        cfg.patience = parse_number<int>(key, value);
    } else if (key == "max_epochs") {
        cfg.max_epochs = parse_number<int>(key, value);
    } else if (key == "max_iterations") {
        cfg.max_iterations = parse_number<int>(key, value);
    } else if (key == "heuristic") {
        cfg.design = parse_design(unquote(value));
    } else if (key == "alpha") {
        cfg.baco.alpha = parse_number<double>(key, value);
    } else if (key == "beta") {
        cfg.baco.beta = parse_number<double>(key, value);
    } else if (key == "rho") {
        cfg.baco.rho = parse_number<double>(key, value);
    } else if (key == "ants") {
        cfg.baco.ants = parse_number<int>(key, value);
    } else if (key == "generations") {
        cfg.baco.generations = parse_number<int>(key, value);
    } else if (key == "tau0") {
        cfg.baco.tau0 = parse_number<double>(key, value);
    } else if (key == "efast_interference") {
        cfg.efast.interference = parse_number<int>(key, value);
    } else if (key == "efast_samples") {
        cfg.efast.samples = parse_number<int>(key, value);
    } else if (key == "efast_focal_frequency") {
        cfg.efast.focal_frequency = parse_number<int>(key, value);
    } else if (key == "seed") {
        cfg.seed = parse_number<Seed>(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view content = strip(drop_comment(line));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string_view key = strip(content.substr(0, eq));
        try {
            apply_setting(cfg, key, content.substr(eq + 1), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.parent_path());
}

}  // namespace msbaco
