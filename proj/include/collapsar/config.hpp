#ifndef COLLAPSAR_CONFIG_HPP
#define COLLAPSAR_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

namespace collapsar {

// Flat "key = value" configuration, one pair per line, '#' starts a comment.
// Dotted keys namespace related settings (grid.n, params.lambda, ...).
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // comma-separated list of floats
    std::vector<double> get_double_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const {
        return entries_;
    }

private:
    std::map<std::string, std::string> entries_;
};

} // namespace collapsar

#endif
