#pragma once

#include <string>
#include <vector>

#include "sdflow/state.hpp"

namespace sdflow {

// One field per file.  Layout, all integers little-endian:
//   bytes 0-3    magic "FSNP"
//   bytes 4-7    u32 endianness marker 0x01020304
//   bytes 8-11   u32 format version (1)
//   bytes 12-15  u32 dim
//   bytes 16-19  u32 points per axis
//   bytes 20-23  u32 dealias numerator
//   bytes 24-27  u32 dealias denominator
//   bytes 28-35  f64 time
//   bytes 36-39  u32 field-name length n
//   bytes 40-..  n name bytes, then M^dim f64 samples, row-major, axis 0 slowest
// Values are written bit-exactly; write-then-read is the identity.
struct FieldSnapshot {
  std::string name;
  double time = 0.0;
  ScalarField field;
};

void write_field_snapshot(const std::string& path, const std::string& name, double time,
                          const ScalarField& f);
FieldSnapshot read_field_snapshot(const std::string& path);

// A full state as rho_<idx>.fsnp, u0_<idx>.fsnp, ..., b_<idx>.fsnp with the
// step index zero-padded to 8 digits.
void write_state_snapshot(const std::string& dir, long index, const State& s);

// Every complete state group in the directory, ordered by step index.
std::vector<State> read_state_snapshots(const std::string& dir);

}  // namespace sdflow
