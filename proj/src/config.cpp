#include "biomatch/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "biomatch/error.hpp"

namespace biomatch {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidConfig, "key '" + key + "': '" + text + "' is not a finite number");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "key '" + key + "': '" + text + "' is not a non-negative integer");
  }
  return value;
}

KeyValues KeyValues::parse(std::string_view text, char separator) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto sep = line.find(separator);
    if (sep == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": missing '" +
                                                 std::string(1, separator) + "'");
    }
    const auto key = trim(line.substr(0, sep));
    if (key.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": empty key");
    }
    kv.set(std::string(key), std::string(trim(line.substr(sep + 1))));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path, char separator) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), separator);
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValues::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw Error(ErrorCode::kInvalidConfig, "missing required key '" + key + "'");
  return *v;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_u64(key, *v) : fallback;
}

double KeyValues::require_double(const std::string& key) const {
  return parse_double(key, require(key));
}

std::uint64_t KeyValues::require_u64(const std::string& key) const {
  return parse_u64(key, require(key));
}

void KeyValues::set(const std::string& key, std::string value) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it != entries_.end()) {
    it->second = std::move(value);
  } else {
    entries_.emplace_back(key, std::move(value));
  }
}

std::string KeyValues::to_text(char separator) const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += separator;
    out += v;
    out += '\n';
  }
  return out;
}

void KeyValues::save(const std::string& path, char separator) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << to_text(separator);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace biomatch
