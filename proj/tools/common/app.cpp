#include "app.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sdfilter/errors.h"

namespace sdfilter::app {

namespace {

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InvalidArgument("invalid " + what + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double resolve_length(const std::string& text, double lc) {
  std::string_view s = trim(text);
  if (s.size() > 2 && s.substr(s.size() - 2) == "lc") {
    const double factor = parse_double(trim(s.substr(0, s.size() - 2)), "length");
    if (!(factor > 0.0)) throw InvalidArgument("length '" + text + "' must be positive");
    return factor * lc;
  }
  const double value = parse_double(s, "length");
  if (!(value > 0.0)) throw InvalidArgument("length '" + text + "' must be positive");
  return value;
}

double resolve_length(const nlohmann::json& value, double lc) {
  if (value.is_number()) {
    const double v = value.get<double>();
    if (!(v > 0.0)) throw InvalidArgument("lengths must be positive");
    return v;
  }
  if (value.is_string()) return resolve_length(value.get<std::string>(), lc);
  throw InvalidArgument("a length must be a number or a string such as \"3lc\"");
}

std::vector<FilterParams> parse_schedule(const nlohmann::json& doc, double lc) {
  const nlohmann::json* levels = &doc;
  if (doc.is_object() && doc.contains("levels")) levels = &doc["levels"];
  if (!levels->is_array()) throw InvalidArgument("schedule must be a JSON array of levels");
  std::vector<FilterParams> out;
  for (const auto& level : *levels) {
    if (!level.is_object()) throw InvalidArgument("every schedule level must be an object");
    try {
      FilterParams p;
      p.lambda = level.at("lambda").get<double>();
      p.eta = resolve_length(level.at("eta"), lc);
      p.mu = level.at("mu").get<double>();
      p.nu = level.at("nu").get<double>();
      p.max_iters = level.value("max_iters", p.max_iters);
      p.eps_degrees = level.value("eps", p.eps_degrees);
      p.unit_constrained = true;
      p.validate();
      out.push_back(p);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("bad schedule level: ") + e.what());
    }
  }
  return out;
}

std::vector<FilterParams> load_schedule(const std::filesystem::path& path, double lc) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open schedule " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed schedule " + path.string() + ": " + e.what());
  }
  return parse_schedule(doc, lc);
}

nlohmann::json params_to_json(const FilterParams& p) {
  return {{"lambda", p.lambda},       {"eta", p.eta}, {"mu", p.mu}, {"nu", p.nu},
          {"max_iters", p.max_iters}, {"eps", p.eps_degrees}};
}

std::vector<int> parse_index_list(std::istream& in) {
  std::vector<int> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
        throw ParseError("invalid index '" + tok + "'", line_no);
      }
      out.push_back(v);
    }
  }
  return out;
}

std::vector<int> load_index_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return parse_index_list(in);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_double(trim(rest.substr(0, comma)), "number"));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace sdfilter::app
