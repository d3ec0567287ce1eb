#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Minimal TOML subset: top-level and [table] / [[array-of-table]] sections,
// bare keys, basic strings, integers, floats, booleans, flat arrays, comments.
// Covers every config file this project reads; nested/dotted keys, dates and
// inline tables are not part of those schemas.
namespace cloop::util::toml {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error("toml: " + msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, int64_t, double, bool, Array> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<int64_t>(v); }
  bool is_double() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }

  const std::string& as_string() const { return std::get<std::string>(v); }
  int64_t as_int() const { return std::get<int64_t>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const Array& as_array() const { return std::get<Array>(v); }
  // ints promote to double
  double as_double() const {
    return is_int() ? static_cast<double>(std::get<int64_t>(v)) : std::get<double>(v);
  }
};

using Table = std::map<std::string, Value>;

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> arrays;

  const Table& table(const std::string& name) const;
  bool has_table(const std::string& name) const { return tables.count(name) > 0; }
};

Document parse(std::string_view text);
Document parse_file(const std::string& path);

// Typed lookups with defaults. The *_or variants never throw; the required
// variants throw ParseError with line 0 when the key is absent or mistyped.
std::string get_string(const Table& t, const std::string& key, const std::string& def);
int64_t get_int(const Table& t, const std::string& key, int64_t def);
double get_double(const Table& t, const std::string& key, double def);
bool get_bool(const Table& t, const std::string& key, bool def);
std::vector<std::string> get_string_array(const Table& t, const std::string& key);

std::string require_string(const Table& t, const std::string& key);
int64_t require_int(const Table& t, const std::string& key);

}  // namespace cloop::util::toml
