#include "prismdg/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "prismdg/errors.hpp"

namespace prismdg {

namespace {

void put_le(std::ostream& out, double x) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double get_le(const unsigned char* b) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void write_snapshot(std::ostream& out, const std::string& field, const FieldSoA<double>& f, double time) {
  const auto& counts = f.layer_counts();
  bool uniform = true;
  for (int n : counts) uniform = uniform && n == counts.front();
  out << "PRISMDG-SNAP 1 " << field << ' ' << f.components() << ' ' << f.num_columns() << ' ';
  if (uniform) {
    out << (counts.empty() ? 0 : counts.front());
  } else {
    out << "mixed";
  }
  out << ' ' << format_double(time) << '\n';
  if (!uniform) {
    for (std::size_t i = 0; i < counts.size(); ++i) out << (i ? " " : "") << counts[i];
    out << '\n';
  }
  for (double v : f.data()) put_le(out, v);
}

void write_snapshot_2d(std::ostream& out, const std::string& field, const std::vector<double>& values,
                       int components, double time) {
  const std::size_t columns = values.size() / (3 * static_cast<std::size_t>(components));
  out << "PRISMDG-SNAP 1 " << field << ' ' << components << ' ' << columns << " 0 " << format_double(time) << '\n';
  for (double v : values) put_le(out, v);
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty snapshot");
  std::istringstream hdr(line);
  std::string magic, layers, time;
  int version = 0;
  Snapshot s;
  if (!(hdr >> magic >> version >> s.field >> s.components >> s.columns >> layers >> time) ||
      magic != "PRISMDG-SNAP" || version != 1) {
    throw IoError("malformed snapshot header: " + line);
  }
  const auto [p, ec] = std::from_chars(time.data(), time.data() + time.size(), s.time);
  if (ec != std::errc()) throw IoError("malformed snapshot time: " + time);
  std::size_t count = 0;
  if (layers == "mixed") {
    if (!std::getline(in, line)) throw IoError("missing layer counts");
    std::istringstream ls(line);
    s.layers.resize(s.columns);
    for (int& n : s.layers) {
      if (!(ls >> n)) throw IoError("short layer count line");
    }
  } else {
    int n = 0;
    const auto [lp, lec] = std::from_chars(layers.data(), layers.data() + layers.size(), n);
    if (lec != std::errc() || lp != layers.data() + layers.size() || n < 0) {
      throw IoError("malformed snapshot layer count: " + layers);
    }
    if (n > 0) s.layers.assign(s.columns, n);
  }
  if (s.layers.empty()) {
    count = static_cast<std::size_t>(s.components) * s.columns * 3;
  } else {
    std::size_t prisms = 0;
    for (int n : s.layers) prisms += n;
    count = static_cast<std::size_t>(s.components) * kPrismNodes * prisms;
  }
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError("short snapshot payload");
  s.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) s.data[i] = get_le(raw.data() + 8 * i);
  return s;
}

FieldSoA<double> snapshot_field(const Snapshot& s) {
  if (s.layers.empty()) throw IoError("snapshot holds a 2D field");
  FieldSoA<double> f(s.components, s.layers);
  f.data() = s.data;
  return f;
}

void write_budget_header(std::ostream& out) {
  out << "t,stage,volume,momentum_x,momentum_y,tracer_mass,tracer_min,tracer_max\n";
}

void write_budget_row(std::ostream& out, const BudgetRow& r) {
  out << format_double(r.time) << ',' << r.stage << ',' << format_double(r.volume) << ','
      << format_double(r.momentum_x) << ',' << format_double(r.momentum_y) << ',' << format_double(r.tracer_mass)
      << ',' << format_double(r.tracer_min) << ',' << format_double(r.tracer_max) << '\n';
}

}  // namespace prismdg
