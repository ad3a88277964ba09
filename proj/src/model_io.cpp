#include "ksid/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ksid/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "model container I/O assumes a little-endian host");

namespace ksid {

namespace {

constexpr char kMagic[8] = {'K', 'S', 'I', 'D', 'M', 'D', 'L', '\n'};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("model file truncated");
  return value;
}

}  // namespace

const Matrix& ModelContainer::section(const std::string& name) const {
  for (const auto& [sec_name, matrix] : sections) {
    if (sec_name == name) return matrix;
  }
  throw DataError("model file is missing section '" + name + "'");
}

void write_container(
    const std::filesystem::path& path, const nlohmann::json& header,
    const std::vector<std::pair<std::string, Matrix>>& sections) {
  nlohmann::json full = header;
  auto& list = full["sections"] = nlohmann::json::array();
  for (const auto& [name, matrix] : sections) {
    list.push_back({{"name", name},
                    {"rows", matrix.rows()},
                    {"cols", matrix.cols()}});
  }
  const std::string header_bytes = full.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open model file for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kModelFormatVersion);
  write_raw(out, static_cast<std::uint64_t>(header_bytes.size()));
  out.write(header_bytes.data(),
            static_cast<std::streamsize>(header_bytes.size()));
  for (const auto& [name, matrix] : sections) {
    out.write(reinterpret_cast<const char*>(matrix.data()),
              static_cast<std::streamsize>(matrix.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing model file: " + path.string());
}

ModelContainer read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a model file (bad magic): " + path.string());
  }
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw DataError("model file format version " + std::to_string(version) +
                    " not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  const auto header_len = read_raw<std::uint64_t>(in);
  std::string header_bytes(header_len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("model file truncated in header");

  ModelContainer container;
  try {
    container.header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model header: " + std::string(e.what()));
  }
  if (!container.header.contains("sections")) {
    throw DataError("model header has no sections list");
  }
  for (const auto& entry : container.header.at("sections")) {
    const auto name = entry.at("name").get<std::string>();
    const auto rows = entry.at("rows").get<std::size_t>();
    const auto cols = entry.at("cols").get<std::size_t>();
    std::vector<double> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw DataError("model file truncated in section '" + name + "'");
    // Bypass the finite check: stored payloads are trusted verbatim so the
    // round trip stays bit-exact.
    Matrix m(rows, cols);
    std::memcpy(m.data(), data.data(), data.size() * sizeof(double));
    container.sections.emplace_back(name, std::move(m));
  }
  return container;
}

std::string peek_model_type(const std::filesystem::path& path) {
  const ModelContainer container = read_container(path);
  if (!container.header.contains("type")) {
    throw DataError("model header has no type tag: " + path.string());
  }
  return container.header.at("type").get<std::string>();
}

}  // namespace ksid
