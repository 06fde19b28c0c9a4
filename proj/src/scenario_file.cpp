#include "hbfq/scenario_file.hpp"

#include "hbfq/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace hbfq {

namespace {

using Number = double;
using Array = std::vector<double>;
using Value = std::variant<Number, std::string, Array>;

struct Entry {
  Value value;
  int line = 0;
  bool used = false;
};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char ch : key) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '_' || ch == '-' || ch == '.';
    if (!ok) return false;
  }
  return key.front() != '.' && key.back() != '.' && key.find("..") == std::string_view::npos;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char ch : s)
    if (ch != '_') cleaned.push_back(ch);
  if (cleaned == "inf" || cleaned == "nan" || cleaned == "-inf") return std::nullopt;
  double out = 0.0;
  const char* begin = cleaned.data();
  const char* end = begin + cleaned.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return out;
}

Value parse_value(std::string_view raw, int line) {
  raw = trim(raw);
  if (raw.empty()) throw ParseError("missing value", line);
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ParseError("unterminated string", line);
    return std::string(raw.substr(1, raw.size() - 2));
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ParseError("unterminated array", line);
    Array arr;
    std::string_view body = trim(raw.substr(1, raw.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (item.empty()) {
        if (comma == std::string_view::npos) break;
        throw ParseError("empty array element", line);
      }
      auto num = parse_number(item);
      if (!num) throw ParseError("array elements must be numbers, got '" + std::string(item) + "'", line);
      arr.push_back(*num);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return arr;
  }
  if (auto num = parse_number(raw)) return *num;
  throw ParseError("cannot parse value '" + std::string(raw) + "'", line);
}

class Table {
public:
  explicit Table(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double number(const std::string& key) {
    auto& e = at(key);
    if (auto* v = std::get_if<Number>(&e.value)) return *v;
    throw ParseError("key '" + key + "' must be a number", e.line);
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::string string(const std::string& key) {
    auto& e = at(key);
    if (auto* v = std::get_if<std::string>(&e.value)) return *v;
    throw ParseError("key '" + key + "' must be a string", e.line);
  }

  Array array(const std::string& key) {
    auto& e = at(key);
    if (auto* v = std::get_if<Array>(&e.value)) return *v;
    throw ParseError("key '" + key + "' must be an array of numbers", e.line);
  }

  int line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_)
      if (!e.used) throw ParseError("unknown key '" + key + "'", e.line);
  }

private:
  Entry& at(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError("missing required key '" + key + "'", 0);
    it->second.used = true;
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

Table tokenize(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string prefix;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    line = trim(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed table header", line_no);
      auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name)) throw ParseError("invalid table name '" + std::string(name) + "'", line_no);
      prefix = std::string(name) + ".";
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    auto key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError("invalid key '" + std::string(key) + "'", line_no);
    std::string full = prefix + std::string(key);
    if (entries.count(full)) throw ParseError("duplicate key '" + full + "'", line_no);
    entries.emplace(full, Entry{parse_value(line.substr(eq + 1), line_no), line_no, false});
  }
  return Table(std::move(entries));
}

// Rewrites model-level InvalidArgument errors so they carry the key's line.
template <class Fn>
auto with_line(const Table& t, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), t.line(key));
  }
}

TypeProfile read_profile(Table& t) {
  const std::string kind = t.string("profile.kind");
  return with_line(t, "profile.kind", [&] {
    if (kind == "uniform") return TypeProfile::uniform(t.number("profile.a"), t.number("profile.b"));
    if (kind == "truncated-exponential")
      return TypeProfile::truncated_exponential(t.number("profile.a"), t.number("profile.b"),
                                                t.number("profile.rate"));
    if (kind == "piecewise-linear" || kind == "piecewise-linear-cdf") {
      auto knots = t.array("profile.knots");
      auto probs = t.array("profile.probs");
      if (t.has("profile.a") && t.number("profile.a") != (knots.empty() ? 0.0 : knots.front()))
        throw ParseError("profile.a disagrees with the first knot", t.line("profile.a"));
      if (t.has("profile.b") && t.number("profile.b") != (knots.empty() ? 0.0 : knots.back()))
        throw ParseError("profile.b disagrees with the last knot", t.line("profile.b"));
      return TypeProfile::piecewise_linear(std::move(knots), std::move(probs));
    }
    throw ParseError("unknown profile.kind '" + kind + "'", t.line("profile.kind"));
  });
}

ServiceDistribution read_service(Table& t) {
  if (!t.has("service.kind")) return ServiceDistribution::exponential();
  std::string kind = t.string("service.kind");
  return with_line(t, "service.kind", [&] {
    if (kind == "exponential") return ServiceDistribution::exponential();
    if (kind == "deterministic") return ServiceDistribution::deterministic();
    if (kind.rfind("erlang", 0) == 0) {
      int k = 0;
      if (kind == "erlang") {
        const double kv = t.number("service.k");
        if (kv != static_cast<int>(kv)) throw ParseError("service.k must be an integer", t.line("service.k"));
        k = static_cast<int>(kv);
      } else if (kind.size() > 7 && kind[6] == '-') {
        auto num = parse_number(std::string_view(kind).substr(7));
        if (!num || *num != static_cast<int>(*num))
          throw ParseError("malformed erlang kind '" + kind + "'", t.line("service.kind"));
        k = static_cast<int>(*num);
      } else {
        throw ParseError("malformed erlang kind '" + kind + "'", t.line("service.kind"));
      }
      return ServiceDistribution::erlang(k);
    }
    if (kind == "hyperexponential")
      return ServiceDistribution::hyperexponential(t.number("service.p"), t.number("service.mean1"));
    throw ParseError("unknown service.kind '" + kind + "'", t.line("service.kind"));
  });
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Table t = tokenize(text);
  Scenario s;
  s.lambda = t.number("lambda");
  s.mu1 = t.number("mu1");
  s.mu2 = t.number_or("mu2", s.mu1);
  s.price = t.number_or("c", 0.0);
  s.min_bid = t.number_or("m", 0.0);
  s.profile = read_profile(t);
  s.service = read_service(t);
  t.reject_unused();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const Scenario& s) {
  auto num = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "lambda = " << num(s.lambda) << "\n"
     << "mu1 = " << num(s.mu1) << "\n"
     << "mu2 = " << num(s.mu2) << "\n"
     << "c = " << num(s.price) << "\n"
     << "m = " << num(s.min_bid) << "\n\n[profile]\n"
     << "kind = \"" << to_string(s.profile.kind()) << "\"\n";
  switch (s.profile.kind()) {
    case TypeProfile::Kind::Uniform:
      os << "a = " << num(s.profile.lower()) << "\nb = " << num(s.profile.upper()) << "\n";
      break;
    case TypeProfile::Kind::TruncatedExponential:
      os << "a = " << num(s.profile.lower()) << "\nb = " << num(s.profile.upper())
         << "\nrate = " << num(s.profile.rate()) << "\n";
      break;
    case TypeProfile::Kind::PiecewiseLinear: {
      auto list = [&](std::span<const double> xs) {
        std::string out = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
        return out + "]";
      };
      os << "knots = " << list(s.profile.knots()) << "\nprobs = " << list(s.profile.probs()) << "\n";
      break;
    }
  }
  os << "\n[service]\nkind = \"" << to_string(s.service.kind()) << "\"\n";
  switch (s.service.kind()) {
    case ServiceDistribution::Kind::Erlang:
      os << "k = " << s.service.stages() << "\n";
      break;
    case ServiceDistribution::Kind::Hyperexponential:
      os << "p = " << num(s.service.mix_probability()) << "\nmean1 = " << num(s.service.phase_mean1()) << "\n";
      break;
    default:
      break;
  }
  return os.str();
}

}  // namespace hbfq
