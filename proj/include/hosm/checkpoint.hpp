#pragma once

#include <map>
#include <string>
#include <vector>

#include "hosm/mlp.hpp"

namespace hosm {

// Self-describing binary checkpoint holding named networks plus a flat
// string-to-string manifest. Byte layout (all little-endian, f64 = IEEE 754
// binary64, str = u32 length + UTF-8 bytes):
//
//   8 bytes magic "HOSMCKP1"
//   u32 n_meta, then n_meta x (str key, str value); keys sorted
//   u32 n_nets, then per net:
//     str name
//     u32 n_layers, then per layer:
//       u32 rows, u32 cols, rows*cols f64 weights (row-major)
//       u32 bias_len (= rows), bias_len f64 bias
//
// The same file works for a single network or a model pair; the manifest
// names the contents.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Mlp>> nets;

  const Mlp* find(const std::string& name) const;
  bool has_meta(const std::string& key) const { return meta.count(key) != 0; }
  std::string meta_or(const std::string& key, const std::string& def) const;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hosm
