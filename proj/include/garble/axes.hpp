// SPDX-License-Identifier: Apache-2.0
//
// Directions in a 2D projection: the information axis (garble centroid to
// extant centroid) and the concreteness axis (unweighted to
// concreteness-weighted extant centroid).
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "garble/projection.hpp"

namespace garble {

using Vec2 = std::array<double, 2>;

struct AxisResult {
  Vec2 origin{};
  /// Unit length.
  Vec2 direction{};
  /// Projection rows that were scored, in ascending order.
  std::vector<std::size_t> rows;
  /// Minmax-normalized scalar projections, aligned with `rows`.
  std::vector<double> scores;
};

/// Axis from `from` towards `to`; every row in `rows` is scored and the
/// scores are minmax-normalized together (all zero if they coincide).
/// Throws a numeric error if the two points coincide.
AxisResult axis_between(const Projection2D& projection, Vec2 from, Vec2 to,
                        std::vector<std::size_t> rows);

/// Scores every point (all classes) along garble centroid -> extant centroid.
AxisResult information_axis(const Projection2D& projection);

/// `concreteness` is aligned with projection.records; only extant rows with a
/// value participate and only they are scored.
AxisResult concreteness_axis(const Projection2D& projection,
                             std::span<const std::optional<double>> concreteness);

/// Angle between two axis directions in degrees, in [0, 180].
double angle_between(const AxisResult& a, const AxisResult& b);
double angle_between(Vec2 a, Vec2 b);

struct AngleEstimate {
  double mean_degrees = 0.0;
  /// Sample standard deviation over the usable resamples.
  double std_degrees = 0.0;
  std::size_t resamples = 0;
  std::size_t skipped = 0;
  std::vector<double> angles;
};

/// Each resample draws extant and garble rows with replacement (same sizes),
/// rebuilds both axes and records their angle. Degenerate resamples are
/// skipped; more than 10% skipped is a numeric error.
AngleEstimate bootstrap_angle(const Projection2D& projection,
                              std::span<const std::optional<double>> concreteness,
                              std::size_t n_resamples, std::uint64_t seed);

}  // namespace garble
