#include "polyrecon/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace polyrecon::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written as raw little-endian bits");

constexpr char kMagic[4] = {'P', 'G', 'N', 'N'};

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char bytes[2] = {static_cast<unsigned char>(v & 0xff),
                                  static_cast<unsigned char>(v >> 8)};
  write_bytes(out, bytes, 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  write_bytes(out, bytes, 4);
}

void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!in) raise(Errc::CorruptRecord, "truncated checkpoint");
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char bytes[2];
  read_bytes(in, bytes, 2);
  return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  read_bytes(in, bytes, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

template <class S>
constexpr std::uint8_t dtype_code() {
  return sizeof(S) == 4 ? 0 : 1;
}

template <class S>
void write_tensor(std::ostream& out, const std::string& name, const std::vector<long>& dims,
                  const S* data, long count) {
  if (name.size() > 0xffff) raise(Errc::BadInput, "tensor name too long");
  write_u16(out, static_cast<std::uint16_t>(name.size()));
  write_bytes(out, name.data(), name.size());
  const std::uint8_t dtype = dtype_code<S>();
  write_bytes(out, &dtype, 1);
  const std::uint8_t rank = static_cast<std::uint8_t>(dims.size());
  write_bytes(out, &rank, 1);
  for (long d : dims) write_u32(out, static_cast<std::uint32_t>(d));
  write_bytes(out, data, static_cast<std::size_t>(count) * sizeof(S));
}

struct RawTensor {
  std::string name;
  std::uint8_t dtype = 0;
  std::vector<long> dims;
  std::vector<unsigned char> payload;
};

RawTensor read_tensor(std::istream& in) {
  RawTensor t;
  const std::uint16_t name_len = read_u16(in);
  t.name.resize(name_len);
  read_bytes(in, t.name.data(), name_len);
  read_bytes(in, &t.dtype, 1);
  std::uint8_t rank = 0;
  read_bytes(in, &rank, 1);
  long count = 1;
  for (int i = 0; i < rank; ++i) {
    const std::uint32_t d = read_u32(in);
    t.dims.push_back(static_cast<long>(d));
    count *= static_cast<long>(d);
  }
  const std::size_t bytes = static_cast<std::size_t>(count) * (t.dtype == 0 ? 4 : 8);
  t.payload.resize(bytes);
  read_bytes(in, t.payload.data(), bytes);
  return t;
}

}  // namespace

template <class S>
void save_checkpoint(const std::string& path, const ParameterStore<S>& store,
                     const std::map<std::string, double>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::BadInput, "cannot open '" + path + "' for writing");
  write_bytes(out, kMagic, 4);
  write_u32(out, kCheckpointVersion);
  const std::uint32_t count =
      static_cast<std::uint32_t>(4 * store.params().size() + meta.size());
  write_u32(out, count);
  for (const auto& [name, p] : store.params()) {
    write_tensor<S>(out, "p/" + name, p.dims, p.value->data(), p.value->size());
    write_tensor<S>(out, "m/" + name, p.dims, p.moment1.data(), p.moment1.size());
    write_tensor<S>(out, "v/" + name, p.dims, p.moment2.data(), p.moment2.size());
    const double step = static_cast<double>(p.step);
    write_tensor<double>(out, "s/" + name, {1}, &step, 1);
  }
  for (const auto& [key, value] : meta) {
    write_tensor<double>(out, "meta/" + key, {1}, &value, 1);
  }
  if (!out) raise(Errc::BadInput, "write failure for '" + path + "'");
}

template <class S>
void load_checkpoint(const std::string& path, ParameterStore<S>& store,
                     std::map<std::string, double>& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::BadInput, "cannot open '" + path + "'");
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) raise(Errc::CorruptRecord, "bad checkpoint magic");
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    raise(Errc::VersionMismatch,
          "checkpoint format version " + std::to_string(version) + " unsupported");
  }
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    RawTensor t = read_tensor(in);
    if (t.name.rfind("meta/", 0) == 0) {
      if (t.dtype != 1 || t.payload.size() != 8) raise(Errc::CorruptRecord, "bad meta tensor");
      double v;
      std::memcpy(&v, t.payload.data(), 8);
      meta[t.name.substr(5)] = v;
      continue;
    }
    const std::string name = t.name.substr(2);
    const char kind = t.name[0];
    if (kind == 's') {
      double v;
      std::memcpy(&v, t.payload.data(), 8);
      store.at(name).step = static_cast<long>(v);
      continue;
    }
    if (t.dtype != dtype_code<S>()) {
      raise(Errc::CheckpointMismatch, "tensor '" + t.name + "' has a different scalar type");
    }
    if (!store.contains(name)) store.create_zeros(name, t.dims);
    Param<S>& p = store.at(name);
    if (p.dims != t.dims) raise(Errc::CheckpointMismatch, "tensor '" + t.name + "' shape differs");
    ArrayX<S>* target = kind == 'p' ? p.value.get() : (kind == 'm' ? &p.moment1 : &p.moment2);
    std::memcpy(target->data(), t.payload.data(), t.payload.size());
  }
}

template void save_checkpoint<float>(const std::string&, const ParameterStore<float>&,
                                     const std::map<std::string, double>&);
template void save_checkpoint<double>(const std::string&, const ParameterStore<double>&,
                                      const std::map<std::string, double>&);
template void load_checkpoint<float>(const std::string&, ParameterStore<float>&,
                                     std::map<std::string, double>&);
template void load_checkpoint<double>(const std::string&, ParameterStore<double>&,
                                      std::map<std::string, double>&);

}  // namespace polyrecon::nn
