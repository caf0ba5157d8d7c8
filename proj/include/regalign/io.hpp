#pragma once

#include <string>
#include <vector>

#include "regalign/correspondence.hpp"
#include "regalign/evaluation.hpp"
#include "regalign/solver.hpp"
#include "regalign/types.hpp"

namespace regalign {

/// Loads a point set; format inferred from the extension:
/// .ply (ASCII, vertex element only), .csv (one point per row),
/// .json (array of arrays).
PointSet load_point_set(const std::string& path, int id = 0);

/// Writes .json (array of arrays) or .csv depending on the extension.
void save_point_set(const PointSet& points, const std::string& path);

CorrespondenceSet load_correspondences(const std::string& path);
void save_correspondences(const CorrespondenceSet& corr, const std::string& path);

/// Transform files store, per set: d, row-major rotation, translation and
/// determinant. Rotations are validated on load.
std::vector<RigidTransform> load_transforms(const std::string& path);
void save_transforms(const std::vector<RigidTransform>& transforms,
                     const std::string& path);

/// CSV with columns iteration, objective, primal_residual, dual_residual.
void write_trace_csv(const std::vector<IterationRecord>& history,
                     const std::string& path);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace regalign
