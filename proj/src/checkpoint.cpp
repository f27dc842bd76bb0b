#include "hosm/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hosm {

namespace {

constexpr char kMagic[8] = {'H', 'O', 'S', 'M', 'C', 'K', 'P', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF), static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& is) {
  std::uint32_t n = get_u32(is);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void put_f64s(std::ostream& os, const double* p, std::size_t n) {
  static_assert(sizeof(double) == 8);
  // assumes little-endian host, which matches every platform this targets
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
}

void get_f64s(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace

const Mlp* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, net] : nets)
    if (n == name) return &net;
  return nullptr;
}

std::string Checkpoint::meta_or(const std::string& key, const std::string& def) const {
  auto it = meta.find(key);
  return it == meta.end() ? def : it->second;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(ck.meta.size()));
  for (const auto& [k, v] : ck.meta) {
    put_str(os, k);
    put_str(os, v);
  }
  put_u32(os, static_cast<std::uint32_t>(ck.nets.size()));
  for (const auto& [name, net] : ck.nets) {
    put_str(os, name);
    put_u32(os, static_cast<std::uint32_t>(net.w.size()));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      put_u32(os, static_cast<std::uint32_t>(net.w[l].rows));
      put_u32(os, static_cast<std::uint32_t>(net.w[l].cols));
      put_f64s(os, net.w[l].a.data(), net.w[l].a.size());
      put_u32(os, static_cast<std::uint32_t>(net.b[l].size()));
      put_f64s(os, net.b[l].data(), net.b[l].size());
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("checkpoint: bad magic in " + path);
  Checkpoint ck;
  const std::uint32_t n_meta = get_u32(is);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = get_str(is);
    std::string v = get_str(is);
    ck.meta.emplace(std::move(k), std::move(v));
  }
  const std::uint32_t n_nets = get_u32(is);
  for (std::uint32_t i = 0; i < n_nets; ++i) {
    std::string name = get_str(is);
    Mlp net;
    const std::uint32_t n_layers = get_u32(is);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
      const std::uint32_t rows = get_u32(is);
      const std::uint32_t cols = get_u32(is);
      Mat w(static_cast<int>(rows), static_cast<int>(cols));
      get_f64s(is, w.a.data(), w.a.size());
      const std::uint32_t blen = get_u32(is);
      if (blen != rows) throw std::runtime_error("checkpoint: bias length mismatch");
      Vec b(blen);
      get_f64s(is, b.data(), b.size());
      net.w.push_back(std::move(w));
      net.b.push_back(std::move(b));
    }
    ck.nets.emplace_back(std::move(name), std::move(net));
  }
  return ck;
}

}  // namespace hosm
