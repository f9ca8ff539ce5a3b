#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "feen/mesh.hpp"

// Binary container for meshes, bases, datasets, and models.
//
// Layout (all integers little-endian):
//   "FEEN" magic, u32 version, u32 section count, then per section
//   u32 name length + name bytes, u32 dtype, u32 ndim, u64 dims[ndim],
//   u64 absolute payload offset, u64 payload byte count.
//   Payloads follow, each 8-byte aligned.  JSON metadata lives in a bytes
//   section named "__meta__".  Files contain no timestamps, so re-runs with
//   identical inputs are bit-identical.

namespace feen::container {

using json = nlohmann::json;

enum class DType : std::uint32_t { f64 = 0, i64 = 1, bytes = 2 };

struct Section {
  std::string name;
  DType dtype = DType::f64;
  std::vector<std::uint64_t> shape;
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;
};

class Writer {
 public:
  void add_f64(const std::string& name, std::vector<std::uint64_t> shape,
               const double* data);
  void add_f64(const std::string& name, const Eigen::VectorXd& v);
  // Matrices are serialized row-major regardless of in-memory layout.
  void add_f64(const std::string& name, const Eigen::MatrixXd& m);
  void add_i64(const std::string& name, std::vector<std::uint64_t> shape,
               const std::int64_t* data);
  void add_i64(const std::string& name, const std::vector<int>& v);
  void add_bytes(const std::string& name, const std::string& data);
  void set_meta(const json& meta);
  void write(const std::string& path) const;

 private:
  struct Pending {
    Section section;
    std::vector<char> payload;
  };
  std::vector<Pending> pending_;
  json meta_;
};

class Container {
 public:
  static Container read(const std::string& path);

  bool has(const std::string& name) const;
  const Section& section(const std::string& name) const;
  std::vector<std::string> names() const;

  Eigen::VectorXd f64_vector(const std::string& name) const;
  Eigen::MatrixXd f64_matrix(const std::string& name) const;  // 2-D sections
  std::vector<std::int64_t> i64(const std::string& name) const;
  std::string bytes(const std::string& name) const;

  const json& meta() const { return meta_; }

 private:
  std::map<std::string, Section> sections_;
  std::vector<char> data_;
  json meta_;
  const char* payload(const Section& s) const { return data_.data() + s.offset; }
};

// FNV-1a over raw bytes; chained hashes thread file identity through the
// mesh -> basis -> dataset -> model pipeline.
std::uint64_t fnv1a(const void* data, std::size_t n,
                    std::uint64_t h = 0xCBF29CE484222325ull);
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xCBF29CE484222325ull);
std::string hash_hex(std::uint64_t h);
std::uint64_t parse_hash_hex(const std::string& s);

std::uint64_t mesh_hash(const mesh::Mesh& m);
std::uint64_t matrix_hash(const Eigen::MatrixXd& m, std::uint64_t h = 0xCBF29CE484222325ull);
std::uint64_t vector_hash(const Eigen::VectorXd& v, std::uint64_t h = 0xCBF29CE484222325ull);

// Hash of a file's full contents, for bit-identical reproduction checks.
std::uint64_t file_hash(const std::string& path);

}  // namespace feen::container
