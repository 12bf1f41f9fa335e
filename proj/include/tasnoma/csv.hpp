#pragma once

// Sweep table CSV: one row per SNR point, 17 significant digits, '.' decimal
// separator regardless of locale.

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tasnoma/errors.hpp"
#include "tasnoma/mc_sim.hpp"
#include "tasnoma/outage.hpp"

namespace tasnoma::csv {

inline constexpr std::array<std::string_view, 9> analytic_columns{
    "snr_db", "p_u1", "p_u2", "p_overall", "p_u1_asym", "p_u2_asym", "p_overall_asym", "flag_u1", "flag_u2"};
inline constexpr std::array<std::string_view, 9> mc_columns{
    "mc_u1", "mc_u1_lo", "mc_u1_hi", "mc_u2", "mc_u2_lo", "mc_u2_hi", "mc_ov", "mc_ov_lo", "mc_ov_hi"};

struct row {
  outage::outage_report analytic;
  std::optional<mc::outage_estimates> simulated;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string header(bool with_mc) {
  std::string h;
  for (auto c : analytic_columns) h.append(c).push_back(',');
  if (with_mc)
    for (auto c : mc_columns) h.append(c).push_back(',');
  h.pop_back();
  return h;
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double parse_number(std::string_view s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw invalid_parameter("malformed number '" + std::string(s) + "'");
  return v;
}

// Writes header plus rows. MC columns appear when every row carries
// estimates; a table mixing the two is rejected.
inline void write(std::ostream& out, std::span<const row> rows) {
  if (rows.empty()) throw invalid_parameter("cannot write an empty table");
  const bool with_mc = rows.front().simulated.has_value();
  for (const auto& r : rows)
    if (r.simulated.has_value() != with_mc)
      throw invalid_parameter("either all rows or no rows must carry Monte Carlo estimates");

  out << header(with_mc) << '\n';
  for (const auto& r : rows) {
    const auto& a = r.analytic;
    std::string line;
    for (double v : {a.snr_db, a.p_u1, a.p_u2, a.p_overall, a.asym_u1, a.asym_u2, a.asym_overall})
      line += format_number(v) + ',';
    line += a.flag_u1 ? "1," : "0,";
    line += a.flag_u2 ? "1" : "0";
    if (with_mc) {
      for (const auto* e : {&r.simulated->u1, &r.simulated->u2, &r.simulated->overall})
        for (double v : {e->p_hat, e->ci95_low, e->ci95_high}) line += ',' + format_number(v);
    }
    out << line << '\n';
  }
}

inline std::string to_string(std::span<const row> rows) {
  std::ostringstream s;
  write(s, rows);
  return s.str();
}

inline void write_file(const std::string& path, std::span<const row> rows) {
  const std::string text = to_string(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

// Parsed CSV with the column layout above. Only the values that the file
// stores are filled in.
struct table {
  bool with_mc = false;
  std::vector<row> rows;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw invalid_parameter("malformed flag '" + std::string(s) + "'");
}

}  // namespace detail

inline table read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw invalid_parameter("CSV is empty");
  table t;
  if (line == header(true))
    t.with_mc = true;
  else if (line != header(false))
    throw invalid_parameter("unexpected CSV header '" + line + "'");
  const std::size_t width = t.with_mc ? 18 : 9;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != width)
      throw invalid_parameter("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                              " fields, got " + std::to_string(f.size()));
    row r;
    auto& a = r.analytic;
    a.snr_db = parse_number(f[0]);
    a.p_u1 = parse_number(f[1]);
    a.p_u2 = parse_number(f[2]);
    a.p_overall = parse_number(f[3]);
    a.asym_u1 = parse_number(f[4]);
    a.asym_u2 = parse_number(f[5]);
    a.asym_overall = parse_number(f[6]);
    a.flag_u1 = detail::parse_flag(f[7]);
    a.flag_u2 = detail::parse_flag(f[8]);
    if (t.with_mc) {
      mc::outage_estimates e{};
      std::size_t k = 9;
      for (auto* m : {&e.u1, &e.u2, &e.overall}) {
        m->p_hat = parse_number(f[k++]);
        m->ci95_low = parse_number(f[k++]);
        m->ci95_high = parse_number(f[k++]);
      }
      r.simulated = e;
    }
    t.rows.push_back(r);
  }
  return t;
}

inline table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  try {
    return read(in);
  } catch (const invalid_parameter& e) {
    throw invalid_parameter(path + ": " + e.what());
  }
}

}  // namespace tasnoma::csv
