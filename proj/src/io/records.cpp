#include "ocrom/io/records.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include "ocrom/errors.hpp"

namespace ocrom::io {

namespace {

template <class T>
T little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return little(v);
}

}  // namespace

RecordWriter::RecordWriter(const std::filesystem::path& path, std::string_view header)
    : out_(path, std::ios::binary), path_(path.string()) {
  if (!out_) throw IoError("cannot write " + path_);
  out_ << header << '\n';
}

void RecordWriter::put_u32(std::uint32_t v) {
  v = little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void RecordWriter::put_u64(std::uint64_t v) {
  v = little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void RecordWriter::matrix(const std::string& name, const DenseMatrix& m) {
  put_u32(static_cast<std::uint32_t>(name.size()));
  out_.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u64(static_cast<std::uint64_t>(m.rows()));
  put_u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double x = little(m.data()[k]);
    out_.write(reinterpret_cast<const char*>(&x), sizeof x);
  }
}

void RecordWriter::integer(const std::string& name, std::uint64_t v) {
  DenseMatrix m(2, 1);
  m << static_cast<double>(v >> 32), static_cast<double>(v & 0xffffffffULL);
  matrix(name, m);
}

void RecordWriter::close() {
  matrix("end", DenseMatrix(0, 0));
  out_.flush();
  if (!out_) throw IoError("write failed: " + path_);
  out_.close();
}

RecordReader::RecordReader(const std::filesystem::path& path, std::string_view header) {
  if (!std::filesystem::exists(path)) throw MissingArtifact("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (!in || line != header) throw IoError(path.string() + ": expected header '" + std::string(header) + "'");
  for (;;) {
    const auto len = get<std::uint32_t>(in);
    if (!in) throw IoError(path.string() + ": truncated file");
    if (len > 4096) throw IoError(path.string() + ": corrupt record name");
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::uint64_t>(in), cols = get<std::uint64_t>(in);
    if (!in) throw IoError(path.string() + ": truncated file");
    if (name == "end") break;
    if (rows > (1ULL << 31) || cols > (1ULL << 31) || (cols && rows > (1ULL << 40) / cols))
      throw IoError(path.string() + ": corrupt size for record " + name);
    DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = get<double>(in);
    if (!in) throw IoError(path.string() + ": truncated record " + name);
    records_[name] = std::move(m);
  }
}

const DenseMatrix& RecordReader::matrix(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw IoError("missing record " + name);
  return it->second;
}

Vector RecordReader::vector(const std::string& name) const {
  const auto& m = matrix(name);
  if (m.size() == 0) return Vector();
  if (m.cols() != 1) throw IoError("record " + name + " is not a vector");
  return m.col(0);
}

double RecordReader::scalar(const std::string& name) const {
  const auto& m = matrix(name);
  if (m.size() != 1) throw IoError("record " + name + " is not a scalar");
  return m(0, 0);
}

std::uint64_t RecordReader::integer(const std::string& name) const {
  const auto& m = matrix(name);
  if (m.size() != 2) throw IoError("record " + name + " is not an integer");
  return (static_cast<std::uint64_t>(m(0)) << 32) | static_cast<std::uint64_t>(m(1));
}

}  // namespace ocrom::io
