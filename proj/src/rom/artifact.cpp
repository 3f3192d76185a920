#include "ocrom/rom/artifact.hpp"


#include "ocrom/errors.hpp"
#include "ocrom/io/records.hpp"

namespace ocrom::rom {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::string_view kHeader = "ocrom-rb 1";

}  // namespace

void save_artifact(const std::filesystem::path& path, const OfflineArtifact& a) {
  const auto& rm = a.model;
  const auto& b = rm.basis;
  const auto& o = rm.ops;
  io::RecordWriter w(path, kHeader);
  w.integer("config_hash", a.config_hash);
  DenseMatrix sizes(3, 1);
  sizes << b.n, b.m, b.num_liftings;
  w.matrix("basis.sizes", sizes);
  w.matrix("basis.Y", b.Y);
  w.matrix("basis.P", b.P);
  w.matrix("basis.U", b.U);
  w.matrix("basis.liftings", b.liftings);
  w.matrix("basis.theta", b.theta);
  w.matrix("ops.M", o.M);
  w.matrix("ops.A", o.A);
  w.matrix("ops.X", o.X);
  w.matrix("ops.B", o.B);
  w.matrix("ops.C", o.C);
  w.matrix("ops.N", o.N);
  w.vector("ops.m_o", o.m_o);
  w.vector("ops.f", o.f);
  w.scalar("ops.c_o", o.c_o);
  w.vector("ops.target_coeffs", o.target_coeffs);
  w.scalar("ops.target_residual", o.target_residual);
  const auto d = static_cast<Eigen::Index>(o.tensor.size());
  DenseMatrix t(d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) t.middleCols(i * d, d) = o.tensor[static_cast<std::size_t>(i)];
  w.matrix("ops.tensor", t);
  w.scalar("alpha", rm.alpha);
  w.scalar("equation", rm.equation == optctrl::StateEquation::navier_stokes ? 1.0 : 0.0);
  DenseMatrix newton(3, 1);
  newton << rm.newton.tol_rel, rm.newton.tol_abs, rm.newton.max_iter;
  w.matrix("newton", newton);
  DenseMatrix dom(static_cast<Eigen::Index>(rm.domain.size()), 2);
  for (std::size_t i = 0; i < rm.domain.size(); ++i) dom.row(static_cast<Eigen::Index>(i)) << rm.domain[i][0], rm.domain[i][1];
  w.matrix("domain", dom);
  DenseMatrix pts(b.num_liftings, static_cast<Eigen::Index>(a.training.points.size()));
  for (std::size_t k = 0; k < a.training.points.size(); ++k) pts.col(static_cast<Eigen::Index>(k)) = a.training.points[k];
  w.matrix("training.points", pts);
  w.scalar("training.sampling", a.training.sampling == TrainingSet::Sampling::grid ? 0.0 : 1.0);
  w.integer("training.seed", a.training.seed);
  const char* fields[] = {"v", "p", "u", "w", "q"};
  for (int k = 0; k < 5; ++k) w.vector(std::string("eigenvalues.") + fields[k], a.eigenvalues[static_cast<std::size_t>(k)]);
  w.scalar("offline_seconds", a.offline_seconds);
  w.close();
}

OfflineArtifact load_artifact(const std::filesystem::path& path) {
  const io::RecordReader r(path, kHeader);
  OfflineArtifact a;
  auto& rm = a.model;
  auto& b = rm.basis;
  auto& o = rm.ops;
  a.config_hash = r.integer("config_hash");
  const Vector sizes = r.vector("basis.sizes");
  if (sizes.size() != 3) throw IoError("corrupt basis.sizes");
  b.n = static_cast<int>(sizes[0]);
  b.m = static_cast<int>(sizes[1]);
  b.num_liftings = static_cast<int>(sizes[2]);
  b.Y = r.matrix("basis.Y");
  b.P = r.matrix("basis.P");
  b.U = r.matrix("basis.U");
  b.liftings = r.matrix("basis.liftings");
  b.theta = r.matrix("basis.theta");
  o.M = r.matrix("ops.M");
  o.A = r.matrix("ops.A");
  o.X = r.matrix("ops.X");
  o.B = r.matrix("ops.B");
  o.C = r.matrix("ops.C");
  o.N = r.matrix("ops.N");
  o.m_o = r.vector("ops.m_o");
  o.f = r.vector("ops.f");
  o.c_o = r.scalar("ops.c_o");
  o.target_coeffs = r.vector("ops.target_coeffs");
  o.target_residual = r.scalar("ops.target_residual");
  const DenseMatrix& t = r.matrix("ops.tensor");
  const auto d = t.rows();
  if (t.cols() != d * d) throw IoError("corrupt tensor record");
  for (Eigen::Index i = 0; i < d; ++i) o.tensor.push_back(t.middleCols(i * d, d));
  rm.alpha = r.scalar("alpha");
  rm.equation = r.scalar("equation") != 0.0 ? optctrl::StateEquation::navier_stokes : optctrl::StateEquation::stokes;
  const Vector newton = r.vector("newton");
  if (newton.size() != 3) throw IoError("corrupt newton record");
  rm.newton = {newton[0], newton[1], static_cast<int>(newton[2])};
  const DenseMatrix& dom = r.matrix("domain");
  for (Eigen::Index i = 0; i < dom.rows(); ++i) rm.domain.push_back({dom(i, 0), dom(i, 1)});
  const DenseMatrix& pts = r.matrix("training.points");
  for (Eigen::Index k = 0; k < pts.cols(); ++k) a.training.points.push_back(pts.col(k));
  a.training.sampling = r.scalar("training.sampling") == 0.0 ? TrainingSet::Sampling::grid : TrainingSet::Sampling::random;
  a.training.seed = r.integer("training.seed");
  const char* fields[] = {"v", "p", "u", "w", "q"};
  for (int k = 0; k < 5; ++k) a.eigenvalues[static_cast<std::size_t>(k)] = r.vector(std::string("eigenvalues.") + fields[k]);
  a.offline_seconds = r.scalar("offline_seconds");

  const auto dim = b.Y.cols();
  if (b.m + b.num_liftings != dim || o.M.rows() != dim || o.B.cols() != dim || o.C.rows() != dim ||
      o.C.cols() != b.U.cols() || o.B.rows() != b.P.cols() || b.theta.rows() != b.num_liftings ||
      (d != 0 && d != dim))
    throw IoError("artifact records have inconsistent dimensions");
  return a;
}

}  // namespace ocrom::rom
