#include "fidbench/config.hpp"

#include <charconv>
#include <cstdio>

#include "fidbench/error.hpp"
#include "fidbench/image.hpp"

namespace fidbench {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError("config key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

} // namespace

KeyValues KeyValues::parse(std::string_view text) {
    KeyValues kv;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        const std::string_view line = trim(text.substr(pos, eol - pos));
        if (!line.empty() && line.front() != '#') {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw FormatError("config: expected key=value, got '" + std::string(line) + "'",
                                  pos);
            }
            const std::string key(trim(line.substr(0, eq)));
            if (key.empty()) {
                throw FormatError("config: empty key", pos);
            }
            kv.entries_[key] = std::string(trim(line.substr(eq + 1)));
        }
        pos = eol + 1;
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return parse({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.message(), e.offset());
    }
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void KeyValues::merge(const KeyValues& other) {
    for (const auto& [k, v] : other.entries_) {
        entries_[k] = v;
    }
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
    const auto v = get(key);
    return v ? parse_number<std::int64_t>(key, *v) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_number<double>(key, *v) : fallback;
}

std::string KeyValues::format() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string digest_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fidbench
