#pragma once

#include <cstdint>
#include <string>

#include "rssl/grid.hpp"

// Binary field snapshots ("RSSL" format, little-endian):
//
//   bytes 0..3   magic "RSSL"
//   u32          version; bit 31 set means the t slot carries an eigenvalue
//                (bound-state export) instead of a simulation time
//   u32          ambient dimension n
//   u64          interior point count N
//   f64          r_max
//   f64          t (or eigenvalue, see version bit)
//   N x (f64,f64) interleaved (re, im) reduced samples
namespace rssl {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint32_t kSnapshotEigenvalueBit = 0x80000000u;

struct Snapshot {
  RadialField field;
  double t = 0.0;           // eigenvalue when eigenvalue_slot is true
  bool eigenvalue_slot = false;
};

void write_snapshot(const std::string& path, const RadialField& f, double t,
                    bool eigenvalue_slot = false);
Snapshot read_snapshot(const std::string& path);

}  // namespace rssl
