#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biomatch {

/// Flat key/value text: one `key<sep>value` pair per line, `#` starts a
/// comment line, surrounding whitespace is trimmed. Keys keep file order.
/// Config files use '=', reports and parameter files use ':'.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, char separator);
  static KeyValues load(const std::string& path, char separator);

  std::optional<std::string> get(const std::string& key) const;
  /// Throws InvalidConfig when the key is absent.
  std::string require(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  double require_double(const std::string& key) const;
  std::uint64_t require_u64(const std::string& key) const;

  /// Replaces an existing value in place or appends.
  void set(const std::string& key, std::string value);
  bool contains(const std::string& key) const { return get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_text(char separator) const;
  void save(const std::string& path, char separator) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

double parse_double(const std::string& key, const std::string& text);
std::uint64_t parse_u64(const std::string& key, const std::string& text);

}  // namespace biomatch
