#include "cloop/util/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cloop::util::toml {

namespace {

struct Cursor {
  std::string_view s;
  size_t i = 0;
  int line = 1;

  bool eof() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  char take() {
    char c = s[i++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i;
  }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) { throw ParseError(msg, c.line); }

void skip_to_eol(Cursor& c) {
  while (!c.eof() && c.peek() != '\n') c.take();
}

void expect_rest_blank(Cursor& c) {
  c.skip_ws_inline();
  if (!c.eof() && c.peek() == '#') skip_to_eol(c);
  if (!c.eof() && c.peek() != '\n') fail(c, "unexpected trailing characters");
}

bool bare_key_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

std::string parse_key(Cursor& c) {
  std::string key;
  while (!c.eof() && bare_key_char(c.peek())) key.push_back(c.take());
  if (key.empty()) fail(c, "expected key");
  return key;
}

std::string parse_basic_string(Cursor& c) {
  if (c.take() != '"') fail(c, "expected '\"'");
  std::string out;
  while (true) {
    if (c.eof()) fail(c, "unterminated string");
    char ch = c.take();
    if (ch == '"') break;
    if (ch == '\n') fail(c, "newline in string");
    if (ch == '\\') {
      if (c.eof()) fail(c, "dangling escape");
      char e = c.take();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: fail(c, std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  c.take();  // '['
  Array arr;
  while (true) {
    c.skip_ws_inline();
    while (!c.eof() && (c.peek() == '\n' || c.peek() == '#')) {
      if (c.peek() == '#') skip_to_eol(c);
      else c.take();
      c.skip_ws_inline();
    }
    if (c.eof()) fail(c, "unterminated array");
    if (c.peek() == ']') {
      c.take();
      break;
    }
    arr.push_back(parse_value(c));
    c.skip_ws_inline();
    while (!c.eof() && (c.peek() == '\n' || c.peek() == '#')) {
      if (c.peek() == '#') skip_to_eol(c);
      else c.take();
      c.skip_ws_inline();
    }
    if (c.eof()) fail(c, "unterminated array");
    if (c.peek() == ',') {
      c.take();
    } else if (c.peek() != ']') {
      fail(c, "expected ',' or ']' in array");
    }
  }
  return Value{std::move(arr)};
}

Value parse_number_or_literal(Cursor& c) {
  std::string tok;
  while (!c.eof() && (bare_key_char(c.peek()) || c.peek() == '+' || c.peek() == '.')) {
    tok.push_back(c.take());
  }
  if (tok.empty()) fail(c, "expected value");
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  const bool looks_float = tok.find('.') != std::string::npos ||
                           tok.find('e') != std::string::npos ||
                           tok.find('E') != std::string::npos;
  if (!looks_float) {
    int64_t iv = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
    if (ec == std::errc() && p == tok.data() + tok.size()) return Value{iv};
  }
  try {
    size_t used = 0;
    double dv = std::stod(tok, &used);
    if (used == tok.size()) return Value{dv};
  } catch (const std::exception&) {
  }
  fail(c, "bad value '" + tok + "'");
}

Value parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) fail(c, "expected value");
  char ch = c.peek();
  if (ch == '"') return Value{parse_basic_string(c)};
  if (ch == '[') return parse_array(c);
  if (ch == '-' || ch == '+' || std::isdigit(static_cast<unsigned char>(ch)) ||
      std::isalpha(static_cast<unsigned char>(ch))) {
    return parse_number_or_literal(c);
  }
  fail(c, "expected value");
}

}  // namespace

const Table& Document::table(const std::string& name) const {
  auto it = tables.find(name);
  if (it == tables.end()) throw ParseError("missing table [" + name + "]", 0);
  return it->second;
}

Document parse(std::string_view text) {
  Document doc;
  Cursor c{text};
  Table* current = &doc.root;
  while (!c.eof()) {
    c.skip_ws_inline();
    if (c.eof()) break;
    char ch = c.peek();
    if (ch == '\n') {
      c.take();
      continue;
    }
    if (ch == '#') {
      skip_to_eol(c);
      continue;
    }
    if (ch == '[') {
      c.take();
      bool is_array = !c.eof() && c.peek() == '[';
      if (is_array) c.take();
      c.skip_ws_inline();
      std::string name = parse_key(c);
      c.skip_ws_inline();
      if (c.eof() || c.take() != ']') fail(c, "expected ']'");
      if (is_array && (c.eof() || c.take() != ']')) fail(c, "expected ']]'");
      expect_rest_blank(c);
      if (is_array) {
        doc.arrays[name].emplace_back();
        current = &doc.arrays[name].back();
      } else {
        if (doc.tables.count(name)) fail(c, "duplicate table [" + name + "]");
        current = &doc.tables[name];
      }
      continue;
    }
    std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.eof() || c.take() != '=') fail(c, "expected '=' after key '" + key + "'");
    Value v = parse_value(c);
    expect_rest_blank(c);
    if (current->count(key)) fail(c, "duplicate key '" + key + "'");
    current->emplace(std::move(key), std::move(v));
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {
const Value* find(const Table& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}
}  // namespace

std::string get_string(const Table& t, const std::string& key, const std::string& def) {
  const Value* v = find(t, key);
  return v && v->is_string() ? v->as_string() : def;
}

int64_t get_int(const Table& t, const std::string& key, int64_t def) {
  const Value* v = find(t, key);
  return v && v->is_int() ? v->as_int() : def;
}

double get_double(const Table& t, const std::string& key, double def) {
  const Value* v = find(t, key);
  return v && (v->is_double() || v->is_int()) ? v->as_double() : def;
}

bool get_bool(const Table& t, const std::string& key, bool def) {
  const Value* v = find(t, key);
  return v && v->is_bool() ? v->as_bool() : def;
}

std::vector<std::string> get_string_array(const Table& t, const std::string& key) {
  std::vector<std::string> out;
  const Value* v = find(t, key);
  if (!v || !v->is_array()) return out;
  for (const Value& e : v->as_array()) {
    if (e.is_string()) out.push_back(e.as_string());
  }
  return out;
}

std::string require_string(const Table& t, const std::string& key) {
  const Value* v = find(t, key);
  if (!v || !v->is_string()) throw ParseError("missing required string '" + key + "'", 0);
  return v->as_string();
}

int64_t require_int(const Table& t, const std::string& key) {
  const Value* v = find(t, key);
  if (!v || !v->is_int()) throw ParseError("missing required integer '" + key + "'", 0);
  return v->as_int();
}

}  // namespace cloop::util::toml
