#include "mentor/checkpoint.hpp"

#include "mentor/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mentor {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'N', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename V>
void put(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename V>
V take(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ValidationError("truncated checkpoint");
  return v;
}

std::string take_bytes(std::istream& in, std::uint64_t n) {
  if (n > (std::uint64_t{1} << 32)) throw ValidationError("corrupt checkpoint length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw ValidationError("truncated checkpoint");
  return s;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& file, const nlohmann::json& header, const diff::ParameterStore<T>& params) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + file.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  const std::string h = header.dump();
  put<std::uint64_t>(out, h.size());
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  put<std::uint64_t>(out, params.size());
  for (const auto* p : params.all()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, sizeof(T));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()), static_cast<std::streamsize>(p->value.size() * sizeof(T)));
  }
  if (!out) throw ValidationError("failed writing " + file.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ValidationError(file.string() + " is not a checkpoint");
  const auto version = take<std::uint32_t>(in);
  if (version != kVersion) throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  CheckpointData data;
  data.header = nlohmann::json::parse(take_bytes(in, take<std::uint64_t>(in)));
  const auto count = take<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = take_bytes(in, take<std::uint32_t>(in));
    const auto size = take<std::uint32_t>(in);
    const auto rows = take<std::uint64_t>(in);
    const auto cols = take<std::uint64_t>(in);
    if (size != 4 && size != 8) throw ValidationError("bad scalar size in checkpoint");
    data.scalar_size = static_cast<int>(size);
    FeatureMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = size == 4 ? static_cast<double>(take<float>(in)) : take<double>(in);
    }
    data.tensors.emplace(std::move(name), std::move(m));
  }
  return data;
}

template <typename T>
void load_parameters(const CheckpointData& data, diff::ParameterStore<T>& params) {
  for (auto* p : params.all()) {
    auto it = data.tensors.find(p->name);
    if (it == data.tensors.end()) throw ValidationError("checkpoint lacks tensor '" + p->name + "'");
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw ValidationError("shape mismatch for tensor '" + p->name + "'");
    }
    p->value = it->second.template cast<T>();
  }
}

template void save_checkpoint<float>(const std::filesystem::path&, const nlohmann::json&, const diff::ParameterStore<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const nlohmann::json&, const diff::ParameterStore<double>&);
template void load_parameters<float>(const CheckpointData&, diff::ParameterStore<float>&);
template void load_parameters<double>(const CheckpointData&, diff::ParameterStore<double>&);

}  // namespace mentor
