#include "fpjump/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
    static const std::vector<std::pair<std::string, std::string>> table{
        {"domain.type", ""},
        {"domain.xmin", ""},
        {"domain.xmax", ""},
        {"domain.L", ""},
        {"coeff.preset", "ou"},
        {"coeff.b", ""},
        {"coeff.sigma", ""},
        {"coeff.S1", ""},
        {"coeff.S2", ""},
        {"grid.N", ""},
        {"evolve.T", "10"},
        {"evolve.safety", "0.9"},
        {"evolve.method", "euler"},
        {"evolve.tol", "1e-12"},
        {"evolve.snapshots", ""},
        {"evolve.dt", ""},
        {"evolve.init", "1"},
        {"evolve.reference_factor", "2"},
        {"mc.M", "1000000"},
        {"mc.T", "1"},
        {"mc.lambda_pad", "10"},
        {"mc.seed", "20240101"},
        {"mc.threads", "0"},
        {"order.levels", "4"},
        {"order.N0", ""},
        {"fig1.times", "1,4,10,12"},
        {"fig1.M", "1000000"},
        {"fig1.N", "64"},
        {"output.dir", "out"},
    };
    return table;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& [k, v] : defaults()) values_[k] = v;
}

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& kv : defaults()) k.push_back(kv.first);
        return k;
    }();
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

void RunConfig::set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::load_text(std::string_view text, const std::string& origin) {
    std::istringstream in{std::string(text)};
    std::string line, section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto comment = line.find_first_of("#;");
        const std::string body = trim(comment == std::string::npos ? line : line.substr(0, comment));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(number) + ": malformed section header");
            }
            section = trim(body.substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
        }
        std::string key = trim(body.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        set(key, trim(body.substr(eq + 1)));
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
}

bool RunConfig::is_set(const std::string& key) const { return !get(key).empty(); }

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& s = get(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    // Accept integral values written in floating notation, e.g. 1e6.
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size()) return v;
    const double d = get_double(key);
    if (!(d >= 0.0) || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return static_cast<std::uint64_t>(d);
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string item = trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || ptr != item.data() + item.size()) {
                throw ConfigError(key + ": expected a comma-separated list of numbers, got '" + s + "'");
            }
            out.push_back(v);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace fpjump
