#include "ocrom/mesh/mesh_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ocrom/errors.hpp"

namespace ocrom::mesh {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-empty line split on whitespace; empty when input is exhausted.
  std::vector<std::string_view> next() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      std::vector<std::string_view> tokens;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return tokens;
    }
    return {};
  }

  std::size_t line() const { return line_no_; }

  std::vector<std::string_view> expect(std::size_t count, const char* what) {
    auto tokens = next();
    if (tokens.empty()) throw ParseError(line_no_, std::string("unexpected end of file in ") + what);
    if (tokens.size() != count)
      throw ParseError(line_no_, std::string("expected ") + std::to_string(count) + " fields in " + what);
    return tokens;
  }

  template <typename T>
  T number(std::string_view tok) const {
    T value{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError(line_no_, "invalid number '" + std::string(tok) + "'");
    return value;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::size_t section_header(LineReader& in, std::vector<std::string_view> tokens,
                           std::string_view name) {
  if (tokens.size() != 2 || tokens[0] != name)
    throw ParseError(in.line(), "expected section " + std::string(name));
  return in.number<std::size_t>(tokens[1]);
}

void check_id(LineReader& in, std::string_view tok, std::size_t expected) {
  if (in.number<std::size_t>(tok) != expected)
    throw ParseError(in.line(), "ids must be consecutive from 0");
}

}  // namespace

std::string format_mesh(const Mesh& mesh) {
  std::string out = "ocrom-mesh 1\n";
  out += "$nodes " + std::to_string(mesh.num_nodes()) + "\n";
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    out += std::to_string(i);
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      append_double(out, mesh.nodes()[i][k]);
    }
    out += '\n';
  }
  out += "$tets " + std::to_string(mesh.num_tets()) + "\n";
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const auto& tet = mesh.tets()[t];
    out += std::to_string(t) + ' ' + std::to_string(tet[0]) + ' ' + std::to_string(tet[1]) + ' ' +
           std::to_string(tet[2]) + ' ' + std::to_string(tet[3]) + '\n';
  }
  out += "$btris " + std::to_string(mesh.boundary().size()) + "\n";
  for (std::size_t b = 0; b < mesh.boundary().size(); ++b) {
    const auto& tri = mesh.boundary()[b];
    out += std::to_string(b) + ' ' + std::to_string(tri.nodes[0]) + ' ' +
           std::to_string(tri.nodes[1]) + ' ' + std::to_string(tri.nodes[2]) + ' ' +
           std::to_string(tri.tag) + '\n';
  }
  for (std::size_t c = 0; c < mesh.centerlines().size(); ++c) {
    const auto& cl = mesh.centerlines()[c];
    out += "$centerline " + std::to_string(c) + ' ' + std::to_string(cl.points.size()) + '\n';
    for (std::size_t i = 0; i < cl.points.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        append_double(out, cl.points[i][k]);
        out += ' ';
      }
      append_double(out, cl.radii[i]);
      out += '\n';
    }
  }
  out += "$end\n";
  return out;
}

Mesh parse_mesh(std::string_view text) {
  LineReader in(text);
  auto header = in.next();
  if (header.size() != 2 || header[0] != "ocrom-mesh" || header[1] != "1")
    throw ParseError(in.line(), "missing 'ocrom-mesh 1' header");

  const std::size_t n = section_header(in, in.next(), "$nodes");
  std::vector<Vec3> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto tok = in.expect(4, "$nodes");
    check_id(in, tok[0], i);
    nodes[i] = Vec3(in.number<double>(tok[1]), in.number<double>(tok[2]), in.number<double>(tok[3]));
  }

  const std::size_t m = section_header(in, in.next(), "$tets");
  std::vector<Tet> tets(m);
  for (std::size_t t = 0; t < m; ++t) {
    auto tok = in.expect(5, "$tets");
    check_id(in, tok[0], t);
    for (int k = 0; k < 4; ++k) tets[t][k] = in.number<int>(tok[k + 1]);
  }

  const std::size_t k = section_header(in, in.next(), "$btris");
  std::vector<BoundaryTriangle> btris(k);
  for (std::size_t b = 0; b < k; ++b) {
    auto tok = in.expect(5, "$btris");
    check_id(in, tok[0], b);
    for (int j = 0; j < 3; ++j) btris[b].nodes[j] = in.number<int>(tok[j + 1]);
    btris[b].tag = in.number<int>(tok[4]);
  }

  std::vector<Centerline> centerlines;
  for (;;) {
    auto tok = in.next();
    if (tok.empty()) throw ParseError(in.line(), "missing $end");
    if (tok.size() == 1 && tok[0] == "$end") break;
    if (tok[0] != "$centerline") throw ParseError(in.line(), "unknown section '" + std::string(tok[0]) + "'");
    if (tok.size() != 3) throw ParseError(in.line(), "malformed $centerline header");
    check_id(in, tok[1], centerlines.size());
    const std::size_t p = in.number<std::size_t>(tok[2]);
    Centerline cl;
    for (std::size_t i = 0; i < p; ++i) {
      auto row = in.expect(4, "$centerline");
      cl.points.emplace_back(in.number<double>(row[0]), in.number<double>(row[1]),
                             in.number<double>(row[2]));
      cl.radii.push_back(in.number<double>(row[3]));
    }
    centerlines.push_back(std::move(cl));
  }
  if (!in.next().empty()) throw ParseError(in.line(), "content after $end");

  return Mesh(std::move(nodes), std::move(tets), std::move(btris), std::move(centerlines));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open mesh file " + path.string());
  std::stringstream buf;
  buf << file.rdbuf();
  return parse_mesh(buf.str());
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write mesh file " + path.string());
  file << format_mesh(mesh);
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace ocrom::mesh
