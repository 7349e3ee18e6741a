#include "core/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace bidride {

std::string platform_tag() { return "P"; }
std::string customer_tag(CustomerId c) { return "C" + std::to_string(c.value); }
std::string driver_tag(DriverId d) { return "D" + std::to_string(d.value); }

std::optional<std::string_view> Event::get(std::string_view key) const {
  for (const auto& [k, v] : payload)
    if (k == key) return std::string_view(v);
  return std::nullopt;
}

std::optional<std::int64_t> Event::get_int(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) return std::nullopt;
  return out;
}

bool Event::visible_to(std::string_view tag) const {
  return std::binary_search(visibility.begin(), visibility.end(), tag);
}

Payload& Payload::add(std::string key, std::string value) {
  items_.emplace_back(std::move(key), std::move(value));
  return *this;
}

Payload& Payload::add(std::string key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return add(std::move(key), os.str());
}

namespace {

void check_field(std::string_view s, std::string_view forbidden) {
  if (s.empty()) fail(ErrorKind::InvalidParameter, "empty event field");
  if (s.find_first_of(forbidden) != std::string_view::npos)
    fail(ErrorKind::InvalidParameter,
         "event field contains a separator: " + std::string(s));
}

constexpr std::string_view kSeparators = "\t\n\r;=,";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view s, std::size_t line, const char* what) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ": bad " + what + " '" +
                               std::string(s) + "'");
  return out;
}

}  // namespace

const Event& EventLog::append(Tick tick, std::string kind, RideId ride,
                              std::vector<std::pair<std::string, std::string>> payload,
                              std::vector<std::string> visibility) {
  if (!events_.empty() && tick < events_.back().tick)
    fail(ErrorKind::Invariant, "event tick " + std::to_string(tick) + " precedes " +
                                   std::to_string(events_.back().tick));
  check_field(kind, kSeparators);
  for (const auto& [k, v] : payload) {
    check_field(k, kSeparators);
    check_field(v, kSeparators);
  }
  for (const auto& t : visibility) check_field(t, kSeparators);
  std::sort(visibility.begin(), visibility.end());
  visibility.erase(std::unique(visibility.begin(), visibility.end()), visibility.end());
  events_.push_back(Event{tick, std::move(kind), ride, std::move(payload),
                          std::move(visibility)});
  return events_.back();
}

std::string EventLog::format_line(const Event& e) {
  std::string line = std::to_string(e.tick);
  line += '\t';
  line += e.kind;
  line += '\t';
  line += e.ride.valid() ? std::to_string(e.ride.value) : "-";
  line += '\t';
  if (e.payload.empty()) line += '-';
  for (std::size_t i = 0; i < e.payload.size(); ++i) {
    if (i) line += ';';
    line += e.payload[i].first;
    line += '=';
    line += e.payload[i].second;
  }
  line += '\t';
  if (e.visibility.empty()) line += '-';
  for (std::size_t i = 0; i < e.visibility.size(); ++i) {
    if (i) line += ',';
    line += e.visibility[i];
  }
  return line;
}

void EventLog::write(std::ostream& os) const {
  for (const Event& e : events_) os << format_line(e) << '\n';
}

std::string EventLog::serialize() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

EventLog EventLog::parse(std::string_view text) {
  EventLog log;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 5)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 5 columns, got " +
                                 std::to_string(cols.size()));
    const Tick tick = parse_int(cols[0], line_no, "tick");
    RideId ride;
    if (cols[2] != "-") ride = RideId(parse_int(cols[2], line_no, "ride id"));
    std::vector<std::pair<std::string, std::string>> payload;
    if (cols[3] != "-") {
      for (std::string_view kv : split(cols[3], ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos)
          fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": payload item '" +
                                     std::string(kv) + "' has no '='");
        payload.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
      }
    }
    std::vector<std::string> vis;
    if (cols[4] != "-")
      for (std::string_view t : split(cols[4], ',')) vis.emplace_back(t);
    try {
      log.append(tick, std::string(cols[1]), ride, std::move(payload), std::move(vis));
    } catch (const Error& e) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace bidride
