#include "dmpanim/types.hpp"

#include "dmpanim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dmpanim {

Demonstration::Demonstration(double dt, Matrix positions, std::vector<std::string> dim_names)
    : dt_(dt), positions_(std::move(positions)), dim_names_(std::move(dim_names)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ValidationError("demonstration: dt must be positive");
  if (positions_.rows() < 3) throw ValidationError("demonstration: at least 3 samples required");
  if (positions_.cols() < 1) throw ValidationError("demonstration: at least 1 dimension required");
  for (Eigen::Index t = 0; t < positions_.rows(); ++t) {
    for (Eigen::Index d = 0; d < positions_.cols(); ++d) {
      if (!std::isfinite(positions_(t, d))) {
        throw ValidationError("demonstration: non-finite value at row " + std::to_string(t) +
                              ", column " + std::to_string(d));
      }
    }
  }
  if (!dim_names_.empty() && dim_names_.size() != dims()) {
    throw ValidationError("demonstration: dim_names size does not match the column count");
  }
}

bool operator==(const Demonstration& a, const Demonstration& b) {
  return a.dt_ == b.dt_ && same_values(a.positions_, b.positions_) && a.dim_names_ == b.dim_names_;
}

bool same_values(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

bool same_values(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.dt == b.dt && same_values(a.positions, b.positions) &&
         same_values(a.velocities, b.velocities) && same_values(a.accelerations, b.accelerations) &&
         same_values(a.phase, b.phase) && same_values(a.forcing, b.forcing) &&
         a.dim_names == b.dim_names;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Learn: return "learn";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace dmpanim
