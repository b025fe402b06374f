#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fpjump {

/// Flat key=value settings. Files may group keys under [section] headers, in
/// which case "key" inside "[grid]" means "grid.key". '#' and ';' start
/// comments. Every key must be one of the known keys; an empty value means
/// "use the default for the chosen preset".
class RunConfig {
public:
    RunConfig();

    static const std::vector<std::string>& known_keys();

    void load_file(const std::string& path);
    void load_text(std::string_view text, const std::string& origin = "<text>");

    /// Throws ConfigError naming the key when it is unknown.
    void set(const std::string& key, const std::string& value);
    /// Parses "key=value".
    void set_assignment(std::string_view assignment);

    bool is_set(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<double> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace fpjump
