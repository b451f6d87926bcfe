#include "byrdie/config.hpp"

#include <fstream>
#include <sstream>

#include "byrdie/errors.hpp"
#include "byrdie/textio.hpp"

namespace byrdie {

void ConfigDoc::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& sec : sections_)
        if (sec.name == section) {
            for (auto& [k, v] : sec.entries)
                if (k == key) {
                    v = value;
                    return;
                }
            sec.entries.emplace_back(key, value);
            return;
        }
    sections_.push_back({section, {{key, value}}});
}

const std::string* ConfigDoc::find(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections_)
        if (sec.name == section)
            for (const auto& [k, v] : sec.entries)
                if (k == key) return &v;
    return nullptr;
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::vector<std::pair<std::string, std::string>> ConfigDoc::items(const std::string& section) const {
    for (const auto& sec : sections_)
        if (sec.name == section) return sec.entries;
    return {};
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw ConfigError("missing config key [" + section + "] " + key);
    return *v;
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

long long ConfigDoc::get_int(const std::string& section, const std::string& key,
                             long long fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        long long out = std::stoll(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key + " is not an integer: " + *v);
    }
}

double ConfigDoc::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    double out;
    if (!parse_double(*v, out))
        throw ConfigError("config key [" + section + "] " + key + " is not a number: " + *v);
    return out;
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("config key [" + section + "] " + key + " is not a boolean: " + *v);
}

std::uint64_t ConfigDoc::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        unsigned long long out = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key +
                          " is not an unsigned integer: " + *v);
    }
}

std::vector<long long> ConfigDoc::get_int_list(const std::string& section,
                                               const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw ConfigError("missing config key [" + section + "] " + key);
    std::vector<long long> out;
    for (const auto& part : split(*v, ',')) {
        std::string p = trim(part);
        if (p.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stoll(p, &pos));
            if (pos != p.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key +
                              " is not an integer list: " + *v);
        }
    }
    if (out.empty())
        throw ConfigError("config key [" + section + "] " + key + " is empty");
    return out;
}

ConfigDoc ConfigDoc::parse(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", line_no);
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ParseError("empty section name", line_no);
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        if (section.empty()) throw ParseError("key outside any [section]", line_no);
        doc.set(section, key, value);
    }
    return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string ConfigDoc::serialize() const {
    std::string out;
    for (const auto& sec : sections_) {
        out += "[" + sec.name + "]\n";
        for (const auto& [k, v] : sec.entries) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

void ConfigDoc::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write config file: " + path);
    f << serialize();
}

} // namespace byrdie
