#include "mgeof/state_file.hpp"

#include "mgeof/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace mgeof {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Line {
  int number;
  std::string_view text;
};

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    const auto t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    lines.push_back({number, t});
  }
  return lines;
}

[[noreturn]] void fail(int line, std::string_view what) {
  throw ParseError(fmt::format("line {}: {}", line, what));
}

// Splits "key rest" at the first whitespace.
std::pair<std::string_view, std::string_view> split_key(std::string_view s) {
  const auto sp = s.find_first_of(" \t");
  if (sp == std::string_view::npos) return {s, {}};
  return {s.substr(0, sp), trim(s.substr(sp))};
}

std::vector<double> parse_numbers(const Line& line) {
  std::vector<double> out;
  std::string_view s = line.text;
  while (!s.empty()) {
    const auto start = s.find_first_not_of(" \t,");
    if (start == std::string_view::npos) break;
    s.remove_prefix(start);
    const auto end = std::min(s.find_first_of(" \t,"), s.size());
    const std::string_view token = s.substr(0, end);
    double value = 0.0;
    const auto* first = token.data();
    // from_chars rejects a leading '+'.
    if (!token.empty() && token.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail(line.number, fmt::format("'{}' is not a number", token));
    }
    if (!std::isfinite(value)) fail(line.number, fmt::format("'{}' is not finite", token));
    out.push_back(value);
    s.remove_prefix(end);
  }
  return out;
}

int parse_int(const Line& line, std::string_view token) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(line.number, fmt::format("'{}' is not an integer", token));
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

GaussianState RawStateFile::to_state() const {
  return GaussianState(CovarianceMatrix(covariance), displacement);
}

RawStateFile parse_state_text(std::string_view text) {
  const auto lines = content_lines(text);
  RawStateFile out;
  bool have_version = false, have_modes = false, have_ordering = false, have_cov = false, have_disp = false;
  std::size_t i = 0;
  const int last_line = lines.empty() ? 0 : lines.back().number;

  while (i < lines.size()) {
    const Line& line = lines[i];
    const auto [key, rest] = split_key(line.text);
    if (key == "version") {
      out.version = parse_int(line, rest);
      if (out.version != kStateFileVersion) fail(line.number, fmt::format("unsupported version {}", out.version));
      have_version = true;
      ++i;
    } else if (key == "n_modes") {
      out.n_modes = parse_int(line, rest);
      if (out.n_modes < 1) fail(line.number, "n_modes must be positive");
      have_modes = true;
      ++i;
    } else if (key == "ordering") {
      if (rest != "qqpp") fail(line.number, fmt::format("ordering '{}' is not supported (only qqpp)", rest));
      have_ordering = true;
      ++i;
    } else if (key == "label") {
      out.label = std::string(rest);
      ++i;
    } else if (key == "provenance") {
      out.provenance = std::string(rest);
      ++i;
    } else if (key == "covariance") {
      if (!have_modes) fail(line.number, "covariance before n_modes");
      const int dim = 2 * out.n_modes;
      out.covariance.resize(dim, dim);
      for (int r = 0; r < dim; ++r) {
        if (++i >= lines.size()) fail(last_line, fmt::format("covariance needs {} rows", dim));
        const auto row = parse_numbers(lines[i]);
        if (static_cast<int>(row.size()) != dim) {
          fail(lines[i].number, fmt::format("covariance row has {} entries, expected {}", row.size(), dim));
        }
        for (int c = 0; c < dim; ++c) out.covariance(r, c) = row[c];
      }
      have_cov = true;
      ++i;
    } else if (key == "displacement") {
      if (!have_modes) fail(line.number, "displacement before n_modes");
      if (++i >= lines.size()) fail(last_line, "displacement values missing");
      const auto values = parse_numbers(lines[i]);
      if (static_cast<int>(values.size()) != 2 * out.n_modes) {
        fail(lines[i].number, fmt::format("displacement has {} entries, expected {}", values.size(), 2 * out.n_modes));
      }
      out.displacement = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      have_disp = true;
      ++i;
    } else {
      fail(line.number, fmt::format("unknown key '{}'", key));
    }
  }
  if (!have_version) fail(last_line, "missing 'version'");
  if (!have_modes) fail(last_line, "missing 'n_modes'");
  if (!have_ordering) fail(last_line, "missing 'ordering'");
  if (!have_cov) fail(last_line, "missing 'covariance'");
  if (!have_disp) out.displacement = Eigen::VectorXd::Zero(2 * out.n_modes);
  return out;
}

RawStateFile read_state_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_state_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_state(const GaussianState& state, std::string_view label, std::string_view provenance) {
  const int n = state.n_modes();
  std::string out = fmt::format("version {}\nn_modes {}\nordering qqpp\n", kStateFileVersion, n);
  // Single-line metadata only; embedded newlines would break the format.
  const auto one_line = [](std::string_view s) {
    std::string t(s);
    for (char& c : t) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    return std::string(trim(t));
  };
  if (!label.empty()) out += fmt::format("label {}\n", one_line(label));
  if (!provenance.empty()) out += fmt::format("provenance {}\n", one_line(provenance));
  out += "covariance\n";
  const auto& m = state.cov.matrix();
  for (int r = 0; r < 2 * n; ++r) {
    for (int c = 0; c < 2 * n; ++c) {
      if (c) out += ' ';
      out += format_number(m(r, c));
    }
    out += '\n';
  }
  out += "displacement\n";
  for (int r = 0; r < 2 * n; ++r) {
    if (r) out += ' ';
    out += format_number(state.displacement(r));
  }
  out += '\n';
  return out;
}

void write_state_file(const std::filesystem::path& path, const GaussianState& state, std::string_view label,
                      std::string_view provenance) {
  const std::string text = serialize_state(state, label, provenance);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ParseError(fmt::format("cannot write '{}'", path.string()));
  f << text;
  if (!f) throw ParseError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace mgeof
