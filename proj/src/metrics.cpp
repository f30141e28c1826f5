#include "fsglove/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fsglove/errors.hpp"
#include "fsglove/so3.hpp"

namespace fsglove {

namespace {

constexpr int kAngleBins = 16;

}  // namespace

JointErrorStats joint_error_stats(const std::vector<double>& measured_deg,
                                  const std::vector<double>& reference_deg) {
  if (measured_deg.size() != reference_deg.size())
    throw LengthMismatch("measured and reference series differ in length");
  const std::size_t n = measured_deg.size();
  if (n < 2) throw LengthMismatch("need at least 2 samples");
  const double ref_min = *std::min_element(reference_deg.begin(), reference_deg.end());
  const double ref_max = *std::max_element(reference_deg.begin(), reference_deg.end());
  const double range = ref_max - ref_min;
  if (range <= 0.0) throw ZeroRange("reference sweep has zero range");

  JointErrorStats stats;
  stats.residuals_deg.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    stats.residuals_deg[i] = measured_deg[i] - reference_deg[i];

  // Least-squares line measured = a + b * reference.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += reference_deg[i];
    sy += measured_deg[i];
    sxx += reference_deg[i] * reference_deg[i];
    sxy += reference_deg[i] * measured_deg[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / static_cast<double>(n);

  std::array<double, kAngleBins> bin_residual{}, bin_linear{};
  std::array<int, kAngleBins> bin_count{};
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int bin = std::min(
        kAngleBins - 1,
        static_cast<int>((reference_deg[i] - ref_min) / range * kAngleBins));
    bin_residual[bin] += stats.residuals_deg[i];
    bin_linear[bin] +=
        measured_deg[i] - (intercept + slope * reference_deg[i]);
    bin_count[bin]++;
    mean += stats.residuals_deg[i];
  }
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double r : stats.residuals_deg) var += (r - mean) * (r - mean);
  stats.std_deg = std::sqrt(var / static_cast<double>(n - 1));

  for (int b = 0; b < kAngleBins; ++b) {
    if (bin_count[b] == 0) continue;
    stats.bias_deg = std::max(stats.bias_deg, std::abs(bin_residual[b] / bin_count[b]));
    stats.non_linearity_pct =
        std::max(stats.non_linearity_pct,
                 std::abs(bin_linear[b] / bin_count[b]) / range * 100.0);
  }
  return stats;
}

double chamfer_unidirectional(const MatX& cloud, const MatX& vertices) {
  if (cloud.rows() == 0 || vertices.rows() == 0)
    throw EmptyInput("chamfer distance needs non-empty inputs");
  const int nv = static_cast<int>(vertices.rows());

  // Uniform grid over the vertex bounding box.
  const Vec3 lo = vertices.colwise().minCoeff().transpose();
  const Vec3 hi = vertices.colwise().maxCoeff().transpose();
  const double extent = std::max({hi.x() - lo.x(), hi.y() - lo.y(),
                                  hi.z() - lo.z(), 1e-9});
  const int res = std::clamp(
      static_cast<int>(std::cbrt(static_cast<double>(nv))), 1, 64);
  const double cell = extent / res;

  auto cell_of = [&](const Vec3& p) {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<int>((p[a] - lo[a]) / cell), 0, res - 1);
    return c;
  };
  std::map<std::tuple<int, int, int>, std::vector<int>> grid;
  for (int v = 0; v < nv; ++v) {
    const auto c = cell_of(vertices.row(v).transpose());
    grid[{c.x(), c.y(), c.z()}].push_back(v);
  }

  double total = 0.0;
  for (int pi = 0; pi < cloud.rows(); ++pi) {
    const Vec3 p = cloud.row(pi).transpose();
    const auto center = cell_of(p);
    double best = std::numeric_limits<double>::infinity();
    // Examine Chebyshev shells outward; any cell at shell distance s is at
    // least (s-1)*cell away, so stop once that bound cannot beat the best.
    for (int s = 0;; ++s) {
      if (s > 0) {
        const double bound = (s - 1) * cell;
        if (bound * bound >= best && best < std::numeric_limits<double>::infinity())
          break;
        if (center.x() - s < 0 && center.x() + s >= res && center.y() - s < 0 &&
            center.y() + s >= res && center.z() - s < 0 && center.z() + s >= res)
          break;  // grid exhausted
      }
      for (int dx = -s; dx <= s; ++dx)
        for (int dy = -s; dy <= s; ++dy)
          for (int dz = -s; dz <= s; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != s) continue;
            const auto it = grid.find({center.x() + dx, center.y() + dy,
                                       center.z() + dz});
            if (it == grid.end()) continue;
            for (int v : it->second) {
              const Vec3 vertex = vertices.row(v).transpose();
              const double d2 = (p - vertex).squaredNorm();
              if (d2 < best) best = d2;
            }
          }
    }
    total += best;
  }
  return total / static_cast<double>(cloud.rows());
}

double pinch_distance(const std::vector<PoseParams>& stream,
                      const HandModel& model, const VecX& beta, int finger) {
  if (stream.empty()) throw EmptyInput("pinch distance needs a non-empty stream");
  if (finger < 1 || finger >= kNumFingers)
    throw IndexOutOfRange("pinch finger must be 1..4");
  double total = 0.0;
  for (const PoseParams& pose : stream) {
    const Vec3 thumb = vertex_position(model, beta, pose, model.fingertips[0]);
    const Vec3 tip = vertex_position(model, beta, pose, model.fingertips[finger]);
    total += (thumb - tip).norm();
  }
  return total / static_cast<double>(stream.size());
}

double point_triangle_sqdist(const Vec3& p, const Vec3& a, const Vec3& b,
                             const Vec3& c) {
  // Voronoi-region case analysis on the barycentric gradient.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).squaredNorm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).squaredNorm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).squaredNorm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).squaredNorm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).squaredNorm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).squaredNorm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).squaredNorm();
}

MeshDistanceQuery::MeshDistanceQuery(const HandMesh& mesh) : mesh_(mesh) {
  if (mesh.faces.rows() == 0) throw EmptyMesh("mesh has no triangles");
  const int nf = static_cast<int>(mesh.faces.rows());
  order_.resize(nf);
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<Vec3> centroids(nf);
  for (int f = 0; f < nf; ++f)
    centroids[f] = (mesh.vertices.row(mesh.faces(f, 0)) +
                    mesh.vertices.row(mesh.faces(f, 1)) +
                    mesh.vertices.row(mesh.faces(f, 2)))
                       .transpose() /
                   3.0;
  nodes_.reserve(2 * nf);
  build(0, nf, centroids);
}

int MeshDistanceQuery::build(int begin, int end, std::vector<Vec3>& centroids) {
  Node node;
  node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (int i = begin; i < end; ++i) {
    const int f = order_[i];
    for (int k = 0; k < 3; ++k) {
      const Vec3 v = mesh_.vertices.row(mesh_.faces(f, k)).transpose();
      node.lo = node.lo.cwiseMin(v);
      node.hi = node.hi.cwiseMax(v);
    }
  }
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 4) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis = 0;
  const Vec3 extent = node.hi - node.lo;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int fa, int fb) {
                     if (centroids[fa][axis] != centroids[fb][axis])
                       return centroids[fa][axis] < centroids[fb][axis];
                     return fa < fb;
                   });
  const int left = build(begin, mid, centroids);
  const int right = build(mid, end, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

double MeshDistanceQuery::sq_to_box(const Vec3& p, const Node& n) const {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({n.lo[a] - p[a], p[a] - n.hi[a], 0.0});
    d2 += d * d;
  }
  return d2;
}

double MeshDistanceQuery::distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  // Explicit stack, nearer child first; prune only strictly worse boxes.
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const Node& node = nodes_[idx];
    if (sq_to_box(p, node) > best) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int f = order_[i];
        const double d2 = point_triangle_sqdist(
            p, mesh_.vertices.row(mesh_.faces(f, 0)).transpose(),
            mesh_.vertices.row(mesh_.faces(f, 1)).transpose(),
            mesh_.vertices.row(mesh_.faces(f, 2)).transpose());
        if (d2 < best) best = d2;
      }
      continue;
    }
    const double dl = sq_to_box(p, nodes_[node.left]);
    const double dr = sq_to_box(p, nodes_[node.right]);
    if (dl < dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return std::sqrt(best);
}

double point_to_mesh(const Vec3& p, const HandMesh& mesh) {
  return MeshDistanceQuery(mesh).distance(p);
}

double kendall_tau(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) return 0.0;
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (series[j] > series[i]) concordant++;
      else if (series[j] < series[i]) discordant++;
    }
  return static_cast<double>(concordant - discordant) /
         (static_cast<double>(n) * (n - 1) / 2.0);
}

DriftReport drift_report(const std::vector<std::pair<Timestamp, Mat3>>& measured,
                         const std::vector<std::pair<Timestamp, Mat3>>& truth) {
  if (measured.size() != truth.size())
    throw LengthMismatch("drift streams differ in length");
  std::map<int, std::pair<double, int>> minutes;  // minute -> (sum, count)
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const int minute = static_cast<int>(measured[i].first / 60'000'000'000ULL);
    const double err = rad_to_deg(geodesic_angle(measured[i].second, truth[i].second));
    auto& slot = minutes[minute];
    slot.first += err;
    slot.second++;
  }
  DriftReport report;
  std::vector<double> series;
  for (const auto& [minute, slot] : minutes) {
    report.per_minute_deg.emplace_back(minute, slot.first / slot.second);
    series.push_back(slot.first / slot.second);
  }
  report.kendall_tau = kendall_tau(series);
  return report;
}

}  // namespace fsglove
