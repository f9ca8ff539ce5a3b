#include "feen/container.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "feen/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container serialization assumes a little-endian host");

namespace feen::container {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kMetaName = "__meta__";

std::size_t dtype_size(DType d) { return d == DType::bytes ? 1 : 8; }

std::uint64_t shape_elems(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

template <typename T>
void append_pod(std::vector<char>& buf, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T read_pod(const std::vector<char>& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw IoError("container file truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void Writer::add_f64(const std::string& name, std::vector<std::uint64_t> shape,
                     const double* data) {
  Pending p;
  p.section.name = name;
  p.section.dtype = DType::f64;
  p.section.nbytes = shape_elems(shape) * 8;
  p.section.shape = std::move(shape);
  p.payload.resize(p.section.nbytes);
  std::memcpy(p.payload.data(), data, p.payload.size());
  pending_.push_back(std::move(p));
}

void Writer::add_f64(const std::string& name, const Eigen::VectorXd& v) {
  add_f64(name, {static_cast<std::uint64_t>(v.size())}, v.data());
}

void Writer::add_f64(const std::string& name, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  add_f64(name,
          {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
          rm.data());
}

void Writer::add_i64(const std::string& name, std::vector<std::uint64_t> shape,
                     const std::int64_t* data) {
  Pending p;
  p.section.name = name;
  p.section.dtype = DType::i64;
  p.section.nbytes = shape_elems(shape) * 8;
  p.section.shape = std::move(shape);
  p.payload.resize(p.section.nbytes);
  std::memcpy(p.payload.data(), data, p.payload.size());
  pending_.push_back(std::move(p));
}

void Writer::add_i64(const std::string& name, const std::vector<int>& v) {
  std::vector<std::int64_t> wide(v.begin(), v.end());
  add_i64(name, {static_cast<std::uint64_t>(v.size())}, wide.data());
}

void Writer::add_bytes(const std::string& name, const std::string& data) {
  Pending p;
  p.section.name = name;
  p.section.dtype = DType::bytes;
  p.section.shape = {data.size()};
  p.section.nbytes = data.size();
  p.payload.assign(data.begin(), data.end());
  pending_.push_back(std::move(p));
}

void Writer::set_meta(const json& meta) { meta_ = meta; }

void Writer::write(const std::string& path) const {
  std::vector<Pending> all(pending_.begin(), pending_.end());
  {
    Pending meta;
    meta.section.name = kMetaName;
    meta.section.dtype = DType::bytes;
    const std::string dumped = meta_.dump();
    meta.section.shape = {dumped.size()};
    meta.section.nbytes = dumped.size();
    meta.payload.assign(dumped.begin(), dumped.end());
    all.push_back(std::move(meta));
  }

  std::size_t header = sizeof(kMagic) + 2 * sizeof(std::uint32_t);
  for (const auto& p : all) {
    header += sizeof(std::uint32_t) + p.section.name.size();
    header += 2 * sizeof(std::uint32_t);
    header += p.section.shape.size() * sizeof(std::uint64_t);
    header += 2 * sizeof(std::uint64_t);
  }

  std::vector<char> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  append_pod(out, kVersion);
  append_pod(out, static_cast<std::uint32_t>(all.size()));

  std::uint64_t offset = header;
  std::vector<std::uint64_t> offsets;
  for (const auto& p : all) {
    offset = (offset + 7) & ~std::uint64_t{7};
    offsets.push_back(offset);
    offset += p.section.nbytes;
  }

  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& s = all[i].section;
    append_pod(out, static_cast<std::uint32_t>(s.name.size()));
    out.insert(out.end(), s.name.begin(), s.name.end());
    append_pod(out, static_cast<std::uint32_t>(s.dtype));
    append_pod(out, static_cast<std::uint32_t>(s.shape.size()));
    for (auto d : s.shape) append_pod(out, d);
    append_pod(out, offsets[i]);
    append_pod(out, s.nbytes);
  }
  if (out.size() != header) throw IoError("internal error: header size mismatch");

  for (std::size_t i = 0; i < all.size(); ++i) {
    out.resize(offsets[i], '\0');
    out.insert(out.end(), all[i].payload.begin(), all[i].payload.end());
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

Container Container::read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  Container c;
  c.data_.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (c.data_.size() < 12 || std::memcmp(c.data_.data(), kMagic, 4) != 0)
    throw IoError("not a FEEN container: " + path);
  pos = 4;
  const auto version = read_pod<std::uint32_t>(c.data_, pos);
  if (version != kVersion)
    throw IoError("unsupported container version " + std::to_string(version));
  const auto n_sections = read_pod<std::uint32_t>(c.data_, pos);

  for (std::uint32_t i = 0; i < n_sections; ++i) {
    Section s;
    const auto name_len = read_pod<std::uint32_t>(c.data_, pos);
    if (pos + name_len > c.data_.size()) throw IoError("container file truncated");
    s.name.assign(c.data_.data() + pos, name_len);
    pos += name_len;
    const auto dtype = read_pod<std::uint32_t>(c.data_, pos);
    if (dtype > 2) throw IoError("unknown section dtype in " + path);
    s.dtype = static_cast<DType>(dtype);
    const auto ndim = read_pod<std::uint32_t>(c.data_, pos);
    if (ndim > 8) throw IoError("implausible section rank in " + path);
    for (std::uint32_t d = 0; d < ndim; ++d)
      s.shape.push_back(read_pod<std::uint64_t>(c.data_, pos));
    s.offset = read_pod<std::uint64_t>(c.data_, pos);
    s.nbytes = read_pod<std::uint64_t>(c.data_, pos);
    if (s.offset + s.nbytes > c.data_.size() || s.offset < pos)
      throw IoError("section '" + s.name + "' exceeds file bounds");
    if (s.nbytes != shape_elems(s.shape) * dtype_size(s.dtype))
      throw IoError("section '" + s.name + "' shape/bytes mismatch");
    if (!c.sections_.emplace(s.name, s).second)
      throw IoError("duplicate section '" + s.name + "'");
  }

  if (c.has(kMetaName)) {
    const Section& ms = c.section(kMetaName);
    try {
      c.meta_ = json::parse(std::string(c.payload(ms), ms.nbytes));
    } catch (const json::exception& e) {
      throw IoError(std::string("corrupt metadata: ") + e.what());
    }
  }
  return c;
}

bool Container::has(const std::string& name) const { return sections_.count(name) != 0; }

const Section& Container::section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw IoError("missing section '" + name + "'");
  return it->second;
}

std::vector<std::string> Container::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : sections_) out.push_back(k);
  return out;
}

Eigen::VectorXd Container::f64_vector(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != DType::f64) throw IoError("section '" + name + "' is not f64");
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.nbytes / 8));
  std::memcpy(v.data(), payload(s), s.nbytes);
  return v;
}

Eigen::MatrixXd Container::f64_matrix(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != DType::f64) throw IoError("section '" + name + "' is not f64");
  if (s.shape.size() != 2) throw IoError("section '" + name + "' is not 2-D");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Eigen::Index>(s.shape[0]), static_cast<Eigen::Index>(s.shape[1]));
  std::memcpy(rm.data(), payload(s), s.nbytes);
  return rm;
}

std::vector<std::int64_t> Container::i64(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != DType::i64) throw IoError("section '" + name + "' is not i64");
  std::vector<std::int64_t> v(s.nbytes / 8);
  std::memcpy(v.data(), payload(s), s.nbytes);
  return v;
}

std::string Container::bytes(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != DType::bytes) throw IoError("section '" + name + "' is not bytes");
  return std::string(payload(s), s.nbytes);
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  return fnv1a(s.data(), s.size(), h);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t parse_hash_hex(const std::string& s) {
  if (s.size() != 16) throw IoError("malformed hash '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

std::uint64_t matrix_hash(const Eigen::MatrixXd& m, std::uint64_t h) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return fnv1a(rm.data(), static_cast<std::size_t>(rm.size()) * 8, h);
}

std::uint64_t vector_hash(const Eigen::VectorXd& v, std::uint64_t h) {
  return fnv1a(v.data(), static_cast<std::size_t>(v.size()) * 8, h);
}

std::uint64_t mesh_hash(const mesh::Mesh& m) {
  std::uint64_t h = fnv1a("mesh");
  const std::uint64_t dim = static_cast<std::uint64_t>(m.dim);
  h = fnv1a(&dim, 8, h);
  h = matrix_hash(m.nodes, h);
  const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> el =
      m.elements.cast<std::int64_t>();
  h = fnv1a(el.data(), static_cast<std::size_t>(el.size()) * 8, h);
  return h;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::vector<char> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return fnv1a(data.data(), data.size());
}

}  // namespace feen::container
