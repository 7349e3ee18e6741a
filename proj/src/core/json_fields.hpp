#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "core/error.hpp"
#include "core/ids.hpp"
#include "core/money.hpp"
#include "core/probability.hpp"

// Strict field reader shared by the scenario, instance and report parsers:
// every key must be consumed, type mismatches name the dotted field path.
namespace bidride::jsonio {

using json = nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::Parse, "field '" + path + "': " + what);
}

class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  void number(std::string_view key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) field_error(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) field_error(at(key), "must be finite");
    }
  }

  template <typename Int>
  void integer(std::string_view key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) field_error(at(key), "expected an integer");
      if (v->is_number_unsigned()) {
        const auto u = v->get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
          field_error(at(key), "out of range");
        out = static_cast<Int>(u);
      } else {
        const auto s = v->get<std::int64_t>();
        if (s < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
            (s > 0 && static_cast<std::uint64_t>(s) >
                          static_cast<std::uint64_t>(std::numeric_limits<Int>::max())))
          field_error(at(key), "out of range");
        out = static_cast<Int>(s);
      }
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) field_error(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void money(std::string_view key, Money& out) {
    std::int64_t c = out.cents();
    integer(key, c);
    out = Money::cents(c);
  }

  void fraction(std::string_view key, Fraction& out) {
    double d = out.value();
    number(key, d);
    if (d < 0.0) field_error(at(key), "must be non-negative");
    out = Fraction::from_double(d);
  }

  void probability(std::string_view key, double& out) {
    number(key, out);
    if (out < 0.0 || out > 1.0) field_error(at(key), "must lie in [0, 1]");
  }

  void minutes_field(std::string_view key, Seconds& out) {
    double m = static_cast<double>(out) / 60.0;
    number(key, m);
    if (m < 0.0) field_error(at(key), "must be non-negative");
    out = static_cast<Seconds>(std::llround(m * 60.0));
  }

  std::optional<Obj> object(std::string_view key) {
    if (const json* v = find(key)) return Obj(*v, at(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) field_error(at(it.key()), "unknown field");
  }

  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

/// Parses text, reporting syntax errors as "line L, column C".
inline json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (auto at = what.find(": "); at != std::string::npos) what = what.substr(at + 2);
    fail(ErrorKind::Parse,
         "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

}  // namespace bidride::jsonio
