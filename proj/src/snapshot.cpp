#include "sdflow/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sdflow/errors.hpp"

namespace fs = std::filesystem;

namespace sdflow {

namespace {

constexpr std::uint32_t kEndianMarker = 0x01020304u;
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::little) return v;
  auto* b = reinterpret_cast<unsigned char*>(&v);
  std::reverse(b, b + sizeof(T));
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  bits = to_little(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw IoError("truncated snapshot: " + path);
  return to_little(v);
}

double get_f64(std::istream& in, const std::string& path) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), 8);
  if (!in) throw IoError("truncated snapshot: " + path);
  bits = to_little(bits);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string index_suffix(long index) {
  std::string s = std::to_string(index);
  if (s.size() < 8) s.insert(0, 8 - s.size(), '0');
  return s;
}

}  // namespace

void write_field_snapshot(const std::string& path, const std::string& name, double time,
                          const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);

  const GridSpec& g = f.grid();
  out.write("FSNP", 4);
  put_u32(out, kEndianMarker);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim));
  put_u32(out, static_cast<std::uint32_t>(g.points_per_axis));
  put_u32(out, static_cast<std::uint32_t>(g.dealias_num));
  put_u32(out, static_cast<std::uint32_t>(g.dealias_den));
  put_f64(out, time);
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  for (double v : f.values()) put_f64(out, v);
  if (!out) throw IoError("write failed: " + path);
}

FieldSnapshot read_field_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FSNP", 4) != 0)
    throw IoError("not a field snapshot (bad magic): " + path);
  if (get_u32(in, path) != kEndianMarker)
    throw IoError("endianness marker mismatch: " + path);
  if (get_u32(in, path) != kVersion) throw IoError("unsupported snapshot version: " + path);

  GridSpec g;
  g.dim = static_cast<int>(get_u32(in, path));
  g.points_per_axis = static_cast<int>(get_u32(in, path));
  g.dealias_num = static_cast<int>(get_u32(in, path));
  g.dealias_den = static_cast<int>(get_u32(in, path));
  if (g.dim < 1 || g.dim > 3 || g.points_per_axis < 4 || g.points_per_axis % 2 != 0 ||
      g.dealias_num <= 0 || g.dealias_den <= 0 || g.dealias_num > g.dealias_den)
    throw IoError("snapshot header describes an invalid grid: " + path);

  FieldSnapshot snap;
  snap.time = get_f64(in, path);
  const std::uint32_t name_len = get_u32(in, path);
  if (name_len > 256) throw IoError("snapshot field name too long: " + path);
  snap.name.resize(name_len);
  in.read(snap.name.data(), name_len);
  if (!in) throw IoError("truncated snapshot: " + path);

  std::vector<double> values(g.num_points());
  for (auto& v : values) v = get_f64(in, path);
  char extra;
  if (in.read(&extra, 1)) throw IoError("trailing bytes after snapshot payload: " + path);
  snap.field = ScalarField::from_values(g, std::move(values));
  return snap;
}

void write_state_snapshot(const std::string& dir, long index, const State& s) {
  const std::string suffix = index_suffix(index) + ".fsnp";
  const fs::path base(dir);
  write_field_snapshot((base / ("rho_" + suffix)).string(), "rho", s.time, s.rho);
  for (int a = 0; a < s.grid().dim; ++a)
    write_field_snapshot((base / ("u" + std::to_string(a) + "_" + suffix)).string(),
                         "u" + std::to_string(a), s.time, s.u[a]);
  write_field_snapshot((base / ("b_" + suffix)).string(), "b", s.time, s.b);
}

std::vector<State> read_state_snapshots(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);

  std::vector<std::pair<long, std::string>> groups;  // index, suffix
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("rho_", 0) != 0 || fname.size() != 4 + 8 + 5 ||
        fname.substr(fname.size() - 5) != ".fsnp")
      continue;
    const std::string digits = fname.substr(4, 8);
    if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
    groups.emplace_back(std::stol(digits), fname.substr(4));
  }
  std::sort(groups.begin(), groups.end());

  std::vector<State> states;
  for (const auto& [index, suffix] : groups) {
    const fs::path base(dir);
    auto rho = read_field_snapshot((base / ("rho_" + suffix)).string());
    State s;
    s.time = rho.time;
    s.rho = rho.field;
    const int d = rho.field.grid().dim;
    s.u = VectorField::zeros(rho.field.grid());
    for (int a = 0; a < d; ++a) {
      auto part = read_field_snapshot((base / ("u" + std::to_string(a) + "_" + suffix)).string());
      if (part.field.grid() != rho.field.grid() || part.time != rho.time)
        throw IoError("inconsistent snapshot group " + suffix + " in " + dir);
      s.u[a] = part.field;
    }
    auto b = read_field_snapshot((base / ("b_" + suffix)).string());
    if (b.field.grid() != rho.field.grid() || b.time != rho.time)
      throw IoError("inconsistent snapshot group " + suffix + " in " + dir);
    s.b = b.field;
    states.push_back(std::move(s));
  }
  return states;
}

}  // namespace sdflow
