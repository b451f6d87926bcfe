#ifndef BYRDIE_CONFIG_HPP
#define BYRDIE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace byrdie {

// Flat typed key=value document with [section] headers and '#' comment lines.
// Preserves section and key order for faithful echo output.
class ConfigDoc {
public:
    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> items(const std::string& section) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    // Comma-separated integer list; a single value yields a one-element list.
    std::vector<long long> get_int_list(const std::string& section, const std::string& key) const;

    static ConfigDoc parse(const std::string& text);
    static ConfigDoc load(const std::string& path);
    std::string serialize() const;
    void save(const std::string& path) const;

private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections_;

    const std::string* find(const std::string& section, const std::string& key) const;
};

} // namespace byrdie

#endif
