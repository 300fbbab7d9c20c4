#include "galign/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace galign {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[5] = {'G', 'A', 'L', 'N', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedParams& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  for (const auto& [name, t] : params.items) {
    write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(os, t.shape().size());
    for (auto e : t.shape()) write_u64(os, e);
    os.write(reinterpret_cast<const char*>(t.values().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

NamedParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[5];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  NamedParams params;
  while (true) {
    std::uint64_t name_len = 0;
    is.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
    if (is.eof()) break;
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::string name(name_len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t rank = read_u64(is);
    Shape shape(rank);
    std::size_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape[i] = read_u64(is);
      count *= shape[i];
    }
    std::vector<double> values(count);
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor " + name);
    params.add(std::move(name), Tensor(std::move(shape), std::move(values), true));
  }
  return params;
}

}  // namespace galign
