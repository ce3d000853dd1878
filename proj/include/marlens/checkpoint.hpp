#pragma once

#include "marlens/params.hpp"

#include <cstdint>
#include <fstream>
#include <string>

namespace marlens {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Container layout (little-endian):
//   magic "MRLC" | u32 version | u64 step_count | u32 n_arrays
//   per array: u32 name_len | name bytes | u64 rows | u64 cols | f32 data
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw CheckpointError("truncated checkpoint");
  return v;
}
} // namespace detail

inline void save_checkpoint(const ParamStore<float>& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open for write: " + path);
  os.write("MRLC", 4);
  detail::put<std::uint32_t>(os, kCheckpointVersion);
  detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(store.step_count()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(store.entries().size()));
  for (const auto& e : store.entries()) {
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(e.value.rows()));
    detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(e.value.cols()));
    for (Eigen::Index j = 0; j < e.value.cols(); ++j)
      for (Eigen::Index i = 0; i < e.value.rows(); ++i)
        detail::put<float>(os, e.value(i, j));
  }
  if (!os) throw CheckpointError("write failed: " + path);
}

inline ParamStore<float> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "MRLC") throw CheckpointError("bad magic");
  if (detail::get<std::uint32_t>(is) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version");
  const auto steps = detail::get<std::uint64_t>(is);
  const auto n = detail::get<std::uint32_t>(is);
  ParamStore<float> store;
  for (std::uint32_t k = 0; k < n; ++k) {
    const auto len = detail::get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (!is) throw CheckpointError("truncated checkpoint");
    const auto rows = static_cast<Eigen::Index>(detail::get<std::uint64_t>(is));
    const auto cols = static_cast<Eigen::Index>(detail::get<std::uint64_t>(is));
    auto& value = store.add(name, rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) value(i, j) = detail::get<float>(is);
  }
  for (std::uint64_t k = 0; k < steps; ++k) store.bump_step();
  return store;
}

} // namespace marlens
