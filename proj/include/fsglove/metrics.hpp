#pragma once

#include <utility>
#include <vector>

#include "fsglove/hand_model.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

struct JointErrorStats {
  double bias_deg = 0.0;
  double std_deg = 0.0;
  double non_linearity_pct = 0.0;  // of the swept reference range
  std::vector<double> residuals_deg;
};

/// Residual statistics of a measured angle sweep against its reference.
/// Bias and non-linearity are evaluated on reference-angle bins; the
/// non-linearity is measured against the least-squares line of the sweep.
JointErrorStats joint_error_stats(const std::vector<double>& measured_deg,
                                  const std::vector<double>& reference_deg);

/// Mean squared nearest-vertex distance from each cloud point to the vertex
/// set (mm^2). Grid-accelerated; exactly equal to the exhaustive scan.
double chamfer_unidirectional(const MatX& cloud, const MatX& vertices);

/// Per-frame distance between the thumb tip vertex and the target finger's
/// tip vertex, averaged over the stream (mm).
double pinch_distance(const std::vector<PoseParams>& stream,
                      const HandModel& model, const VecX& beta, int finger);

/// Exact squared distance from a point to one triangle (face, edge, or
/// vertex region).
double point_triangle_sqdist(const Vec3& p, const Vec3& a, const Vec3& b,
                             const Vec3& c);

/// Exact minimum distance from a point to a triangle mesh (mm), via a
/// BVH that prunes with squared bounds; equal to the triangle-by-triangle
/// scan bit for bit.
double point_to_mesh(const Vec3& p, const HandMesh& mesh);

/// Prebuilt tree for repeated point_to_mesh queries on one mesh.
class MeshDistanceQuery {
 public:
  explicit MeshDistanceQuery(const HandMesh& mesh);
  double distance(const Vec3& p) const;

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;  // children, or -1 at leaves
    int begin = 0, end = 0;     // triangle range at leaves
  };
  const HandMesh& mesh_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int build(int begin, int end, std::vector<Vec3>& centroids);
  double sq_to_box(const Vec3& p, const Node& n) const;
};

struct DriftReport {
  std::vector<std::pair<int, double>> per_minute_deg;  // (minute, mean error)
  double kendall_tau = 0.0;  // monotone-trend statistic of the series
};

/// Per-minute mean geodesic error between aligned orientation streams;
/// multiple sensors may be interleaved, binning is by timestamp.
DriftReport drift_report(const std::vector<std::pair<Timestamp, Mat3>>& measured,
                         const std::vector<std::pair<Timestamp, Mat3>>& truth);

double kendall_tau(const std::vector<double>& series);

}  // namespace fsglove
