#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fidbench {

// Flat key=value configuration text. Blank lines and lines starting with '#'
// are ignored; whitespace around keys and values is trimmed.
class KeyValues {
public:
    static KeyValues parse(std::string_view text);
    static KeyValues load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    // Entries of other override ours.
    void merge(const KeyValues& other);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    std::string format() const;

private:
    std::map<std::string, std::string> entries_;
};

// FNV-1a 64, rendered as 16 hex digits.
std::string digest_hex(std::string_view text);

} // namespace fidbench
