#pragma once

// File formats. Everything numeric is written with 17 significant digits
// ("%.17g"), which round-trips doubles exactly and makes repeated runs with
// the same inputs byte-identical.
//
//   signal CSV    header "<axis>,...,re,im"; one row per grid point in
//                 row-major order, index columns first
//   signal binary little-endian: u32 axis count, u32 size per axis, then
//                 f64 re/im interleaved in row-major order
//   dataset CSV   one signal per row, values interleaved re,im
//   basis CSV     row per index: index, omega, then the transform row
//                 interleaved re,im
//   curve CSV     header "k_metric,group_norm,error,ratio", rows sorted by
//                 (k_metric, group_norm)

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlab/meter.hpp"
#include "invlab/signal.hpp"
#include "invlab/stone.hpp"

namespace invlab {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// strtod rather than stod: subnormal results set ERANGE but still parse to
// the correctly rounded value, and they must round-trip.
inline double parse_double(const std::string& s, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (s.empty() || end != begin + s.size())
    throw std::runtime_error(std::string("malformed ") + what + " value '" + s + "'");
  return v;
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof bits == sizeof v);
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("truncated binary signal");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return v;
}

inline double get_f64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("truncated binary signal");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

inline void save_signal_csv(const Signal& z, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  std::string header;
  for (const auto& a : z.grid.axes) header += a.name + ",";
  header += "re,im\n";
  out << header;

  const std::size_t rank = z.grid.rank();
  std::vector<std::size_t> coords(rank, 0);
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    std::string row;
    for (std::size_t d = 0; d < rank; ++d) row += std::to_string(coords[d]) + ",";
    row += format_double(z.values[i].real()) + "," + format_double(z.values[i].imag()) + "\n";
    out << row;
    for (std::size_t d = rank; d-- > 0;) {
      if (++coords[d] < z.grid.axes[d].size) break;
      coords[d] = 0;
    }
  }
}

inline Signal load_signal_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty signal CSV");
  auto cols = detail::split_csv(line);
  if (cols.size() < 3 || cols[cols.size() - 2] != "re" || cols.back() != "im")
    throw std::runtime_error("signal CSV header must end with re,im");
  const std::size_t rank = cols.size() - 2;
  std::vector<std::string> names(cols.begin(), cols.begin() + rank);

  std::vector<std::vector<std::size_t>> indices;
  std::vector<cdouble> flat_values;
  std::vector<std::size_t> sizes(rank, 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != rank + 2) throw std::runtime_error("signal CSV row has wrong column count");
    std::vector<std::size_t> idx(rank);
    for (std::size_t d = 0; d < rank; ++d) {
      idx[d] = static_cast<std::size_t>(detail::parse_double(f[d], "index"));
      sizes[d] = std::max(sizes[d], idx[d] + 1);
    }
    indices.push_back(std::move(idx));
    flat_values.emplace_back(detail::parse_double(f[rank], "re"), detail::parse_double(f[rank + 1], "im"));
  }

  std::vector<Axis> axes;
  for (std::size_t d = 0; d < rank; ++d) axes.push_back(Axis{names[d], sizes[d], AxisKind::spatial, 0});
  Grid grid(std::move(axes));
  if (indices.size() != grid.size()) throw std::runtime_error("signal CSV does not cover the grid");
  std::vector<cdouble> values(grid.size());
  std::vector<bool> seen(grid.size(), false);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t flat = grid.flat_index(indices[r]);
    if (seen[flat]) throw std::runtime_error("signal CSV repeats a grid point");
    seen[flat] = true;
    values[flat] = flat_values[r];
  }
  return Signal(std::move(grid), std::move(values));
}

inline void save_signal_bin(const Signal& z, const std::filesystem::path& path) {
  std::string buf;
  detail::put_u32(buf, static_cast<std::uint32_t>(z.grid.rank()));
  for (const auto& a : z.grid.axes) detail::put_u32(buf, static_cast<std::uint32_t>(a.size));
  for (const auto& v : z.values) {
    detail::put_f64(buf, v.real());
    detail::put_f64(buf, v.imag());
  }
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// Axis names are not part of the binary format; callers may supply them,
// otherwise axes load as "a0", "a1", ...
inline Signal load_signal_bin(const std::filesystem::path& path,
                              std::vector<std::string> names = {}) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  std::size_t pos = 0;
  const std::uint32_t rank = detail::get_u32(buf, pos);
  if (!names.empty() && names.size() != rank)
    throw std::runtime_error("binary signal rank does not match supplied axis names");
  std::vector<Axis> axes;
  for (std::uint32_t d = 0; d < rank; ++d) {
    const std::uint32_t sz = detail::get_u32(buf, pos);
    std::string nm = names.empty() ? ("a" + std::to_string(d)) : names[d];
    axes.push_back(Axis{std::move(nm), sz, AxisKind::spatial, 0});
  }
  Grid grid(std::move(axes));
  std::vector<cdouble> values(grid.size());
  for (auto& v : values) {
    const double re = detail::get_f64(buf, pos);
    const double im = detail::get_f64(buf, pos);
    v = {re, im};
  }
  if (pos != buf.size()) throw std::runtime_error("binary signal has trailing bytes");
  return Signal(std::move(grid), std::move(values));
}

inline void save_dataset_csv(const std::vector<Signal>& dataset, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  for (const auto& x : dataset) {
    std::string row;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      if (i) row += ",";
      row += format_double(x.values[i].real()) + "," + format_double(x.values[i].imag());
    }
    out << row << "\n";
  }
}

inline std::vector<Signal> load_dataset_csv(const std::filesystem::path& path,
                                            const std::string& axis = "u") {
  auto in = detail::open_in(path, std::ios::in);
  std::vector<Signal> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() % 2 != 0) throw std::runtime_error("dataset CSV row must interleave re,im");
    std::vector<cdouble> vals(f.size() / 2);
    for (std::size_t i = 0; i < vals.size(); ++i)
      vals[i] = {detail::parse_double(f[2 * i], "re"), detail::parse_double(f[2 * i + 1], "im")};
    out.emplace_back(Grid::line(axis, vals.size()), std::move(vals));
  }
  if (out.empty()) throw std::runtime_error("dataset CSV is empty");
  return out;
}

inline void save_basis_csv(const DiagonalizingBasis& b, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  std::string header = "index,omega";
  for (std::size_t u = 0; u < b.n; ++u)
    header += ",re" + std::to_string(u) + ",im" + std::to_string(u);
  out << header << "\n";
  for (std::size_t k = 0; k < b.n; ++k) {
    std::string row = std::to_string(k) + "," + format_double(b.frequencies[k]);
    for (std::size_t u = 0; u < b.n; ++u) {
      const cdouble v = b.transform[k * b.n + u];
      row += "," + format_double(v.real()) + "," + format_double(v.imag());
    }
    out << row << "\n";
  }
}

// ---- stability report serialization ----

inline std::string curve_to_csv(const StabilityReport& rep) {
  if (rep.samples.empty())
    throw std::invalid_argument("curve_to_csv: report has no samples");
  std::vector<StabilitySample> rows = rep.samples;
  std::stable_sort(rows.begin(), rows.end(), [](const StabilitySample& a, const StabilitySample& b) {
    if (a.k_metric != b.k_metric) return a.k_metric < b.k_metric;
    return a.group_norm < b.group_norm;
  });
  std::string out = "k_metric,group_norm,error,ratio\n";
  for (const auto& s : rows)
    out += format_double(s.k_metric) + "," + format_double(s.group_norm) + "," +
           format_double(s.error) + "," + format_double(s.ratio) + "\n";
  return out;
}

inline void emit_curve(const StabilityReport& rep, const std::filesystem::path& path) {
  const std::string body = curve_to_csv(rep);  // throws before creating the file
  auto out = detail::open_out(path, std::ios::out);
  out << body;
}

// Minimal deterministic JSON emitter: keys appear in insertion order and
// numbers are always "%.17g".
class JsonWriter {
 public:
  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(std::string_view k) {
    comma();
    append_string(k);
    buf_ += ':';
    pending_value_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_double(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(std::string_view v) {
    comma();
    append_string(v);
    return *this;
  }

  const std::string& str() const { return buf_; }

 private:
  JsonWriter& open(char c) {
    comma();
    buf_ += c;
    first_.push_back(true);
    return *this;
  }
  JsonWriter& close(char c) {
    buf_ += c;
    first_.pop_back();
    return *this;
  }
  JsonWriter& raw(const std::string& s) {
    comma();
    buf_ += s;
    return *this;
  }
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!first_.empty()) {
      if (!first_.back()) buf_ += ',';
      first_.back() = false;
    }
  }
  void append_string(std::string_view s) {
    buf_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': buf_ += "\\\""; break;
        case '\\': buf_ += "\\\\"; break;
        case '\n': buf_ += "\\n"; break;
        case '\t': buf_ += "\\t"; break;
        default: buf_ += c;
      }
    }
    buf_ += '"';
  }

  std::string buf_;
  std::vector<bool> first_;
  bool pending_value_ = false;
};

inline std::string report_to_json(const StabilityReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.key("representation_id").value(std::string_view(rep.representation_id));
  w.key("estimated_C").value(rep.estimated_C);
  w.key("samples").begin_array();
  for (const auto& s : rep.samples) {
    w.begin_object();
    w.key("k_metric").value(s.k_metric);
    w.key("group_norm").value(s.group_norm);
    w.key("error").value(s.error);
    w.key("ratio").value(s.ratio);
    w.key("included").value(s.included);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  auto out = detail::open_out(path, std::ios::out);
  out << body;
}

inline std::string read_text(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace invlab
