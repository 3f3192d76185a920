#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "ocrom/numerics/types.hpp"

namespace ocrom::io {

using numerics::DenseMatrix;
using numerics::Vector;

/// Binary record files: a text header line, then named records
/// (u32 name length, name, u64 rows, u64 cols, rows*cols little-endian
/// doubles in column-major order), closed by a record named "end".
class RecordWriter {
 public:
  RecordWriter(const std::filesystem::path& path, std::string_view header);
  void matrix(const std::string& name, const DenseMatrix& m);
  void vector(const std::string& name, const Vector& v) { matrix(name, v); }
  void scalar(const std::string& name, double x) { matrix(name, DenseMatrix::Constant(1, 1, x)); }
  /// Stored as two exact 32-bit halves.
  void integer(const std::string& name, std::uint64_t v);
  void close();

 private:
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  std::ofstream out_;
  std::string path_;
};

class RecordReader {
 public:
  /// Throws MissingArtifact when the file does not exist, IoError on a bad
  /// header or truncated payload.
  RecordReader(const std::filesystem::path& path, std::string_view header);
  bool has(const std::string& name) const { return records_.count(name) > 0; }
  const DenseMatrix& matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::uint64_t integer(const std::string& name) const;

 private:
  std::map<std::string, DenseMatrix> records_;
};

}  // namespace ocrom::io
