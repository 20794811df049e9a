#include "rssl/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace rssl {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'S', 'L'};

template <class T>
void put(std::ostream& os, T value) {
  // x86-64 host is little-endian; raw writes match the declared layout.
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T take(std::istream& is, const std::string& what) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error("snapshot read: truncated while reading " + what);
  return value;
}

}  // namespace

void write_snapshot(const std::string& path, const RadialField& f, double t,
                    bool eigenvalue_slot) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("snapshot write: cannot open " + path);
  os.write(kMagic, 4);
  const std::uint32_t version =
      kSnapshotVersion | (eigenvalue_slot ? kSnapshotEigenvalueBit : 0u);
  put(os, version);
  put(os, static_cast<std::uint32_t>(f.grid.dim));
  put(os, static_cast<std::uint64_t>(f.grid.npoints));
  put(os, f.grid.r_max);
  put(os, t);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(sizeof(Complex) * f.v.size()));
  if (!os) throw Error("snapshot write: failed writing " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("snapshot read: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("snapshot read: bad magic in " + path);
  const auto version = take<std::uint32_t>(is, "version");
  if ((version & ~kSnapshotEigenvalueBit) != kSnapshotVersion)
    throw Error("snapshot read: unsupported version in " + path);
  const auto dim = take<std::uint32_t>(is, "dimension");
  const auto npoints = take<std::uint64_t>(is, "point count");
  const auto r_max = take<double>(is, "r_max");
  const auto t = take<double>(is, "t slot");

  Snapshot snap;
  snap.eigenvalue_slot = (version & kSnapshotEigenvalueBit) != 0;
  snap.t = t;
  snap.field = make_field(make_grid(static_cast<int>(dim),
                                    static_cast<Eigen::Index>(npoints), r_max));
  is.read(reinterpret_cast<char*>(snap.field.v.data()),
          static_cast<std::streamsize>(sizeof(Complex) * npoints));
  if (!is) throw Error("snapshot read: truncated samples in " + path);
  return snap;
}

}  // namespace rssl
