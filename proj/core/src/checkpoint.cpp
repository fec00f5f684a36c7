#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "divaug/error.hpp"
#include "divaug/oracle.hpp"

namespace divaug {
namespace {

constexpr std::array<char, 4> kMagic = {'D', 'V', 'A', 'G'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_bytes(std::istream& in, int n) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), n)) throw FormatError("checkpoint: unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

}  // namespace

void save_checkpoint(const OracleModel& model, std::ostream& out) {
  const Architecture& a = model.architecture();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(a.kind));
  put_u32(out, static_cast<std::uint32_t>(a.height));
  put_u32(out, static_cast<std::uint32_t>(a.width));
  put_u32(out, static_cast<std::uint32_t>(a.channels));
  put_u32(out, a.kind == ModelKind::Linear ? 0U : static_cast<std::uint32_t>(a.hidden));
  put_u32(out, static_cast<std::uint32_t>(a.classes));
  for (double v : model.normalization().mean) put_f64(out, v);
  for (double v : model.normalization().stddev) put_f64(out, v);
  const auto params = model.parameters();
  put_u64(out, params.size());
  for (double v : params) put_f64(out, v);
  if (!out) throw Error("checkpoint: write failed");
}

OracleModel load_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Architecture a;
  const std::uint32_t kind = get_u32(in);
  if (kind > 1) throw FormatError("checkpoint: unknown model kind");
  a.kind = static_cast<ModelKind>(kind);
  a.height = static_cast<int>(get_u32(in));
  a.width = static_cast<int>(get_u32(in));
  a.channels = static_cast<int>(get_u32(in));
  a.hidden = static_cast<int>(get_u32(in));
  a.classes = static_cast<int>(get_u32(in));
  try {
    a.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  InputNormalization norm;
  for (int c = 0; c < a.channels; ++c) norm.mean.push_back(get_f64(in));
  for (int c = 0; c < a.channels; ++c) norm.stddev.push_back(get_f64(in));
  const std::uint64_t count = get_bytes(in, 8);
  if (count != a.parameter_count()) throw FormatError("checkpoint: parameter count does not match architecture");
  std::vector<double> params(count);
  for (auto& v : params) v = get_f64(in);
  return OracleModel(a, std::move(norm), std::move(params));
}

void save_checkpoint(const OracleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot open " + path + " for writing");
  save_checkpoint(model, out);
}

OracleModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace divaug
