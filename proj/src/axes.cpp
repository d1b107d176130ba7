// SPDX-License-Identifier: Apache-2.0
#include "garble/axes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "garble/error.hpp"

namespace garble {

namespace {

void require_2d(const Projection2D& projection) {
  if (projection.out_dims != 2) {
    throw usage_error("axes are defined on 2D projections");
  }
}

Vec2 point(const Projection2D& p, std::size_t i) {
  return {p.coords[2 * i], p.coords[2 * i + 1]};
}

Vec2 centroid(const Projection2D& p, std::span<const std::size_t> rows) {
  Vec2 c{0.0, 0.0};
  for (std::size_t i : rows) {
    c[0] += p.coords[2 * i];
    c[1] += p.coords[2 * i + 1];
  }
  c[0] /= static_cast<double>(rows.size());
  c[1] /= static_cast<double>(rows.size());
  return c;
}

// Largest distance from `c` to any of the rows; sets the scale below which
// two centroids count as coincident.
double extent(const Projection2D& p, std::span<const std::size_t> rows, Vec2 c) {
  double r = 0.0;
  for (std::size_t i : rows) {
    const Vec2 q = point(p, i);
    r = std::max(r, std::hypot(q[0] - c[0], q[1] - c[1]));
  }
  return r;
}

std::vector<std::size_t> rows_with_label(const Projection2D& p, Label label) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.records[i].label == label) rows.push_back(i);
  }
  return rows;
}

struct ConcretenessCentroids {
  Vec2 plain;
  Vec2 weighted;
  double scale;
};

ConcretenessCentroids concreteness_centroids(
    const Projection2D& p, std::span<const std::size_t> rows,
    std::span<const std::optional<double>> concreteness) {
  double weight_total = 0.0;
  Vec2 weighted{0.0, 0.0};
  for (std::size_t i : rows) {
    const double w = *concreteness[i];
    weight_total += w;
    weighted[0] += w * p.coords[2 * i];
    weighted[1] += w * p.coords[2 * i + 1];
  }
  if (!(weight_total > 0.0)) {
    throw numeric_error("concreteness axis: total weight is zero");
  }
  weighted[0] /= weight_total;
  weighted[1] /= weight_total;
  const Vec2 plain = centroid(p, rows);
  return {plain, weighted, extent(p, rows, plain)};
}

bool coincident(Vec2 a, Vec2 b, double scale) {
  return std::hypot(b[0] - a[0], b[1] - a[1]) <= 1e-10 * scale;
}

}  // namespace

AxisResult axis_between(const Projection2D& projection, Vec2 from, Vec2 to,
                        std::vector<std::size_t> rows) {
  require_2d(projection);
  const double dx = to[0] - from[0];
  const double dy = to[1] - from[1];
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) throw numeric_error("axis endpoints coincide");

  AxisResult axis;
  axis.origin = from;
  axis.direction = {dx / len, dy / len};
  axis.rows = std::move(rows);
  axis.scores.reserve(axis.rows.size());
  for (std::size_t i : axis.rows) {
    const Vec2 q = point(projection, i);
    axis.scores.push_back((q[0] - from[0]) * axis.direction[0] +
                          (q[1] - from[1]) * axis.direction[1]);
  }
  if (!axis.scores.empty()) {
    const auto [lo, hi] = std::minmax_element(axis.scores.begin(), axis.scores.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (auto& s : axis.scores) s = range > 0.0 ? (s - min) / range : 0.0;
  }
  return axis;
}

AxisResult information_axis(const Projection2D& projection) {
  require_2d(projection);
  const auto extant = rows_with_label(projection, Label::extant);
  const auto garble = rows_with_label(projection, Label::garble);
  if (extant.empty() || garble.empty()) {
    throw usage_error("information axis needs extant and garble points");
  }
  const Vec2 from = centroid(projection, garble);
  const Vec2 to = centroid(projection, extant);
  std::vector<std::size_t> all(projection.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const double scale = std::max(extent(projection, all, from), 1e-300);
  if (coincident(from, to, scale)) {
    throw numeric_error("information axis: garble and extant centroids coincide");
  }
  return axis_between(projection, from, to, std::move(all));
}

AxisResult concreteness_axis(const Projection2D& projection,
                             std::span<const std::optional<double>> concreteness) {
  require_2d(projection);
  if (concreteness.size() != projection.size()) {
    throw usage_error("concreteness column does not match projection");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < projection.size(); ++i) {
    if (projection.records[i].label == Label::extant && concreteness[i]) {
      rows.push_back(i);
    }
  }
  if (rows.size() < 2) {
    throw usage_error("concreteness axis needs >= 2 rated extant points");
  }
  const auto c = concreteness_centroids(projection, rows, concreteness);
  if (coincident(c.plain, c.weighted, c.scale)) {
    throw numeric_error(
        "concreteness axis: weighted and unweighted centroids coincide");
  }
  return axis_between(projection, c.plain, c.weighted, std::move(rows));
}

double angle_between(Vec2 a, Vec2 b) {
  const double dot = std::clamp(a[0] * b[0] + a[1] * b[1], -1.0, 1.0);
  return std::acos(dot) * 180.0 / std::numbers::pi;
}

double angle_between(const AxisResult& a, const AxisResult& b) {
  return angle_between(a.direction, b.direction);
}

AngleEstimate bootstrap_angle(const Projection2D& projection,
                              std::span<const std::optional<double>> concreteness,
                              std::size_t n_resamples, std::uint64_t seed) {
  require_2d(projection);
  if (n_resamples < 2) throw usage_error("bootstrap needs >= 2 resamples");
  if (concreteness.size() != projection.size()) {
    throw usage_error("concreteness column does not match projection");
  }
  const auto extant = rows_with_label(projection, Label::extant);
  const auto garble = rows_with_label(projection, Label::garble);
  if (extant.empty() || garble.empty()) {
    throw usage_error("bootstrap needs extant and garble points");
  }

  AngleEstimate est;
  std::vector<std::size_t> ext_sample(extant.size());
  std::vector<std::size_t> gar_sample(garble.size());
  std::vector<std::size_t> rated;
  for (std::size_t r = 0; r < n_resamples; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick_e(0, extant.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_g(0, garble.size() - 1);
    for (auto& i : ext_sample) i = extant[pick_e(rng)];
    for (auto& i : gar_sample) i = garble[pick_g(rng)];

    rated.clear();
    for (std::size_t i : ext_sample) {
      if (concreteness[i]) rated.push_back(i);
    }
    const Vec2 g = centroid(projection, gar_sample);
    const Vec2 e = centroid(projection, ext_sample);
    std::vector<std::size_t> both(ext_sample);
    both.insert(both.end(), gar_sample.begin(), gar_sample.end());
    const double scale = extent(projection, both, g);

    bool ok = rated.size() >= 2 && !coincident(g, e, scale);
    Vec2 info{};
    Vec2 conc{};
    if (ok) {
      double weight_total = 0.0;
      for (std::size_t i : rated) weight_total += *concreteness[i];
      ok = weight_total > 0.0;
      if (ok) {
        const auto c = concreteness_centroids(projection, rated, concreteness);
        ok = !coincident(c.plain, c.weighted, c.scale);
        const double li = std::hypot(e[0] - g[0], e[1] - g[1]);
        info = {(e[0] - g[0]) / li, (e[1] - g[1]) / li};
        const double lc = std::hypot(c.weighted[0] - c.plain[0],
                                     c.weighted[1] - c.plain[1]);
        conc = {(c.weighted[0] - c.plain[0]) / lc,
                (c.weighted[1] - c.plain[1]) / lc};
      }
    }
    if (!ok) {
      ++est.skipped;
      continue;
    }
    est.angles.push_back(angle_between(info, conc));
  }

  if (est.skipped * 10 > n_resamples) {
    throw numeric_error("bootstrap: " + std::to_string(est.skipped) + " of " +
                        std::to_string(n_resamples) +
                        " resamples were degenerate (limit 10%)");
  }
  est.resamples = est.angles.size();
  if (est.resamples < 2) throw numeric_error("bootstrap: fewer than 2 usable resamples");
  double sum = 0.0;
  for (double a : est.angles) sum += a;
  est.mean_degrees = sum / static_cast<double>(est.resamples);
  double ss = 0.0;
  for (double a : est.angles) ss += (a - est.mean_degrees) * (a - est.mean_degrees);
  est.std_degrees = std::sqrt(ss / static_cast<double>(est.resamples - 1));
  return est;
}

}  // namespace garble
