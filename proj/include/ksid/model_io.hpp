// Self-describing binary container for trained models.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "KSIDMDL\n"
//   bytes 8..11  format version (u32), currently 1
//   bytes 12..19 header length in bytes (u64)
//   header       UTF-8 JSON: a "type" tag, model metadata, and a "sections"
//                array of {name, rows, cols} entries
//   payload      the sections' entries concatenated in header order,
//                row-major IEEE-754 binary64, little-endian
//
// Matrices, centers and normalization statistics all travel in the binary
// payload so a save/load round trip reproduces every double bit-identically.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ksid/matrix.hpp"

namespace ksid {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelContainer {
  nlohmann::json header;
  std::vector<std::pair<std::string, Matrix>> sections;

  const Matrix& section(const std::string& name) const;
};

// `header` must not contain a "sections" key; it is generated from the list.
void write_container(const std::filesystem::path& path,
                     const nlohmann::json& header,
                     const std::vector<std::pair<std::string, Matrix>>& sections);

// Throws DataError on bad magic, version mismatch or a malformed/truncated
// file.
ModelContainer read_container(const std::filesystem::path& path);

// Reads just the "type" tag, for dispatching loads.
std::string peek_model_type(const std::filesystem::path& path);

}  // namespace ksid
